//! The `horoshrinker` command line: curve generation, phase portraits, tables and verification.

pub mod curve_file;
pub mod svg;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{parameter_table, phase_portrait, OrbitKind, ParameterTable, PhasePortraitSpec};
use crate::error::{Error, Result};
use crate::geometry::CurveFamily;
use crate::grim::{solve_grim, solve_grim_sampled, GrimClassification, PhasePoint};
use crate::ode::{Event, SolverConfig, Status};
use crate::rotational::{solve_bowl_with, solve_wing, solve_wing_sampled, BowlOptions, PicardSetup, StarterComparison};

pub use curve_file::CurveFile;
use svg::Plot;

#[derive(Debug, Parser)]
#[command(
    name = "horoshrinker",
    version,
    about = "Horo-shrinker generating curves in hyperbolic space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub event_tol: Option<f64>,
    /// TOML file with `rtol`, `atol`, `event_tol`, `max_steps`, `h_max`, `h_init`.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutFlags {
    /// Curve CSV; events, report and Picard JSON files are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grim reaper through the minimum (or maximum) height z0.
    Grim {
        #[arg(long, allow_negative_numbers = true)]
        z0: f64,
        #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
        s_max: f64,
        #[arg(long, allow_negative_numbers = true)]
        spacing: Option<f64>,
        #[command(flatten)]
        out: OutFlags,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Bowl meeting the axis at height z0.
    Bowl {
        #[arg(long, allow_negative_numbers = true)]
        z0: f64,
        #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
        r_max: f64,
        #[arg(long, allow_negative_numbers = true)]
        spacing: Option<f64>,
        #[command(flatten)]
        out: OutFlags,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Wing with waist (x0, z0).
    Wing {
        #[arg(long, allow_negative_numbers = true)]
        x0: f64,
        #[arg(long, allow_negative_numbers = true)]
        z0: f64,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        s_max: f64,
        #[arg(long, allow_negative_numbers = true)]
        spacing: Option<f64>,
        #[command(flatten)]
        out: OutFlags,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Orbits of the reduced (z, theta) system.
    Phase {
        /// Comma-separated seeds, each `z` (theta = 0) or `z:theta`.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.2,1.1,2,5",
            allow_hyphen_values = true
        )]
        seeds: Vec<String>,
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        z_range: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        theta_range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        span: f64,
        /// Portrait JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Parameter table over a grid of z0 values.
    Table {
        #[arg(long)]
        family: String,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        grid: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Recompute the verification report of a curve CSV.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        family: Option<String>,
        /// Report JSON; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rtol: Option<f64>,
    atol: Option<f64>,
    event_tol: Option<f64>,
    max_steps: Option<usize>,
    h_max: Option<f64>,
    h_init: Option<f64>,
}

impl SolverFlags {
    pub fn resolve(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let file: ConfigFile =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
            cfg.rtol = file.rtol.unwrap_or(cfg.rtol);
            cfg.atol = file.atol.unwrap_or(cfg.atol);
            cfg.event_tol = file.event_tol.unwrap_or(cfg.event_tol);
            cfg.max_steps = file.max_steps.unwrap_or(cfg.max_steps);
            cfg.h_max = file.h_max.or(cfg.h_max);
            cfg.h_init = file.h_init.or(cfg.h_init);
        }
        cfg.rtol = self.rtol.unwrap_or(cfg.rtol);
        cfg.atol = self.atol.unwrap_or(cfg.atol);
        cfg.event_tol = self.event_tol.unwrap_or(cfg.event_tol);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// 0 on success, 1 on numerical failure, 2 on usage or validation errors.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_)
        | Error::Precondition(_)
        | Error::Config(_)
        | Error::Parse { .. }
        | Error::TooFewSamples { .. } => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::Incomplete(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub enum Outcome {
    Done,
    /// Files were written but the integration did not complete.
    Incomplete(String),
}

fn status_outcome(parts: &[(&str, Status)]) -> Outcome {
    match parts.iter().find(|(_, s)| *s != Status::Completed) {
        Some((what, s)) => {
            Outcome::Incomplete(format!("{what} integration ended with status {s:?}; files are partial"))
        }
        None => Outcome::Done,
    }
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Grim {
            z0,
            s_max,
            spacing,
            out,
            solver,
        } => cmd_grim(*z0, *s_max, *spacing, out, solver),
        Command::Bowl {
            z0,
            r_max,
            spacing,
            out,
            solver,
        } => cmd_bowl(*z0, *r_max, *spacing, out, solver),
        Command::Wing {
            x0,
            z0,
            s_max,
            spacing,
            out,
            solver,
        } => cmd_wing(*x0, *z0, *s_max, *spacing, out, solver),
        Command::Phase {
            seeds,
            z_range,
            theta_range,
            span,
            out,
            svg,
            solver,
        } => cmd_phase(
            seeds,
            z_range.as_deref(),
            theta_range.as_deref(),
            *span,
            out.as_deref(),
            svg.as_deref(),
            solver,
        ),
        Command::Table {
            family,
            grid,
            out,
            solver,
        } => cmd_table(family, grid, out.as_deref(), solver),
        Command::Verify { input, family, out } => cmd_verify(input, family.as_deref(), out.as_deref()),
    }
}

fn with_solver_metadata(file: CurveFile, cfg: &SolverConfig) -> CurveFile {
    file.meta_f64("rtol", cfg.rtol)
        .meta_f64("atol", cfg.atol)
        .meta_f64("event_tol", cfg.event_tol)
        .meta("max_steps", cfg.max_steps.to_string())
        .meta("version", env!("CARGO_PKG_VERSION"))
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    create(path)?.write_all(text.as_bytes())?;
    Ok(())
}

/// Writes the curve, its report and the given sidecar JSON files.
fn emit_curve(file: &CurveFile, out: &Path) -> Result<()> {
    let report = file.report()?;
    file.write(create(out)?)?;
    write_json(&out.with_extension("report.json"), &report)?;
    println!(
        "wrote {} ({} samples, max residual {:e})",
        out.display(),
        file.rows.len(),
        report.max_residual
    );
    Ok(())
}

fn curve_plot(title: String, file: &CurveFile, mirror: bool) -> Plot {
    let mut p = Plot::new(title, "x", "z");
    let pts: Vec<(f64, f64)> = file.rows.iter().map(|r| (r[1], r[2])).collect();
    if mirror {
        let mut left: Vec<(f64, f64)> = pts.iter().rev().map(|&(x, z)| (-x, z)).collect();
        left.extend(&pts);
        p.series.push(left);
    } else {
        p.series.push(pts);
    }
    p.h_lines.push(1.0);
    p
}

#[derive(Serialize)]
struct GrimEvents<'a> {
    family: &'static str,
    start_height: f64,
    z0: Option<f64>,
    z0_star: Option<f64>,
    period_x: Option<f64>,
    periods: &'a [f64],
    first_integral_c: f64,
    first_integral_drift: f64,
    classification: GrimClassification,
    status: Status,
    events: &'a [Event],
}

fn cmd_grim(z0: f64, s_max: f64, spacing: Option<f64>, out: &OutFlags, solver: &SolverFlags) -> Result<Outcome> {
    let cfg = solver.resolve()?;
    if !(s_max > 0.0) || !s_max.is_finite() {
        return Err(Error::Precondition(format!("--s-max must be positive, got {s_max}")));
    }
    let orbit = match spacing {
        Some(h) => solve_grim_sampled(z0, (-s_max, s_max), h, &cfg)?,
        None => solve_grim(z0, (-s_max, s_max), &cfg)?,
    };
    let path = out.out.clone().unwrap_or_else(|| PathBuf::from("grim.csv"));
    let mut file = CurveFile::from_grim(&orbit).meta_f64("z0", z0).meta_f64("s_max", s_max);
    if let Some(h) = spacing {
        file = file.meta_f64("spacing", h);
    }
    let file = with_solver_metadata(file, &cfg);
    emit_curve(&file, &path)?;
    write_json(
        &path.with_extension("events.json"),
        &GrimEvents {
            family: "grim",
            start_height: z0,
            z0: orbit.z0,
            z0_star: orbit.z0_star,
            period_x: orbit.period_x,
            periods: &orbit.periods,
            first_integral_c: orbit.first_integral_c,
            first_integral_drift: orbit.first_integral_drift,
            classification: orbit.classification,
            status: orbit.status,
            events: &orbit.events,
        },
    )?;
    if let Some(svg) = &out.svg {
        write_text(
            svg,
            &curve_plot(format!("grim reaper, z0 = {z0}"), &file, false).render(),
        )?;
    }
    Ok(status_outcome(&[("grim", orbit.status)]))
}

#[derive(Serialize)]
struct BowlEvents<'a> {
    family: &'static str,
    z0: f64,
    r_switch: f64,
    extrema: &'a [Event],
    z_one_crossings: &'a [f64],
    energy_residual: f64,
    switched_to_arc_length_at: Option<f64>,
    diagnostics: &'a [String],
    status: Status,
}

#[derive(Serialize)]
struct PicardReport<'a> {
    setup: Option<&'a PicardSetup>,
    starter: Option<&'a StarterComparison>,
}

fn cmd_bowl(z0: f64, r_max: f64, spacing: Option<f64>, out: &OutFlags, solver: &SolverFlags) -> Result<Outcome> {
    let cfg = solver.resolve()?;
    let options = BowlOptions {
        spacing: Some(spacing.unwrap_or(0.0)),
        ..BowlOptions::default()
    };
    if let Some(h) = spacing {
        if !(h > 0.0) {
            return Err(Error::Precondition(format!("--spacing must be positive, got {h}")));
        }
    }
    let bowl = solve_bowl_with(z0, r_max, &options, &cfg)?;
    let path = out.out.clone().unwrap_or_else(|| PathBuf::from("bowl.csv"));
    let mut file = CurveFile::from_bowl(&bowl)
        .meta_f64("r_max", r_max)
        .meta_f64("r_switch", bowl.r_switch);
    if let Some(h) = spacing {
        file = file.meta_f64("spacing", h);
    }
    let file = with_solver_metadata(file, &cfg);
    emit_curve(&file, &path)?;
    write_json(
        &path.with_extension("events.json"),
        &BowlEvents {
            family: "bowl",
            z0,
            r_switch: bowl.r_switch,
            extrema: &bowl.extrema,
            z_one_crossings: &bowl.z_one_crossings,
            energy_residual: bowl.energy_residual,
            switched_to_arc_length_at: bowl.switched_to_arc_length_at,
            diagnostics: &bowl.diagnostics,
            status: bowl.status,
        },
    )?;
    write_json(
        &path.with_extension("picard.json"),
        &PicardReport {
            setup: bowl.starter.as_ref().map(|s| &s.picard_setup),
            starter: bowl.starter.as_ref(),
        },
    )?;
    for d in &bowl.diagnostics {
        eprintln!("note: {d}");
    }
    if let Some(svg) = &out.svg {
        write_text(svg, &curve_plot(format!("bowl, z0 = {z0}"), &file, true).render())?;
    }
    Ok(status_outcome(&[("bowl", bowl.status)]))
}

#[derive(Serialize)]
struct WingEvents<'a> {
    family: &'static str,
    x0: f64,
    z0: f64,
    upper_extrema: &'a [Event],
    lower_extrema: &'a [Event],
    x_critical_points: &'a [f64],
    waist_second_derivative: f64,
    min_x: f64,
    min_x_at: f64,
    status_upper: Status,
    status_lower: Status,
}

fn cmd_wing(
    x0: f64,
    z0: f64,
    s_max: f64,
    spacing: Option<f64>,
    out: &OutFlags,
    solver: &SolverFlags,
) -> Result<Outcome> {
    let cfg = solver.resolve()?;
    let wing = match spacing {
        Some(h) => solve_wing_sampled(x0, z0, s_max, h, &cfg)?,
        None => solve_wing(x0, z0, s_max, &cfg)?,
    };
    let path = out.out.clone().unwrap_or_else(|| PathBuf::from("wing.csv"));
    let mut file = CurveFile::from_wing(&wing)
        .meta_f64("x0", x0)
        .meta_f64("z0", z0)
        .meta_f64("s_max", s_max);
    if let Some(h) = spacing {
        file = file.meta_f64("spacing", h);
    }
    let file = with_solver_metadata(file, &cfg);
    emit_curve(&file, &path)?;
    write_json(
        &path.with_extension("events.json"),
        &WingEvents {
            family: "wing",
            x0,
            z0,
            upper_extrema: &wing.upper_extrema,
            lower_extrema: &wing.lower_extrema,
            x_critical_points: &wing.x_critical_points,
            waist_second_derivative: wing.waist_second_derivative,
            min_x: wing.min_x,
            min_x_at: wing.min_x_at,
            status_upper: wing.status_upper,
            status_lower: wing.status_lower,
        },
    )?;
    if let Some(svg) = &out.svg {
        write_text(
            svg,
            &curve_plot(format!("wing, (x0, z0) = ({x0}, {z0})"), &file, true).render(),
        )?;
    }
    Ok(status_outcome(&[
        ("upper branch", wing.status_upper),
        ("lower branch", wing.status_lower),
    ]))
}

fn parse_seed(s: &str) -> Result<PhasePoint> {
    let bad = || Error::Precondition(format!("seed `{s}` is not `z` or `z:theta`"));
    let (z, theta) = match s.split_once(':') {
        Some((z, t)) => (
            z.trim().parse().map_err(|_| bad())?,
            t.trim().parse().map_err(|_| bad())?,
        ),
        None => (s.trim().parse().map_err(|_| bad())?, 0.0),
    };
    Ok(PhasePoint::new(z, theta))
}

fn cmd_phase(
    seeds: &[String],
    z_range: Option<&[f64]>,
    theta_range: Option<&[f64]>,
    span: f64,
    out: Option<&Path>,
    svg: Option<&Path>,
    solver: &SolverFlags,
) -> Result<Outcome> {
    let cfg = solver.resolve()?;
    let mut spec = PhasePortraitSpec::new(seeds.iter().map(|s| parse_seed(s)).collect::<Result<_>>()?);
    if let Some(r) = z_range {
        spec.z_range = (r[0], r[1]);
    }
    if let Some(r) = theta_range {
        spec.theta_range = (r[0], r[1]);
    }
    spec.span = span;
    let portrait = phase_portrait(&spec, &cfg)?;
    let out = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("phase.json"));
    write_json(&out, &portrait)?;
    let mut plot = Plot::new("phase plane", "z", "theta");
    for o in &portrait.orbits {
        if o.kind != OrbitKind::Equilibrium {
            plot.series.push(o.points.iter().map(|p| (p.z, p.theta)).collect());
        }
    }
    plot.h_lines.push(0.0);
    plot.v_lines.push(1.0);
    plot.markers.push((portrait.equilibrium.z, portrait.equilibrium.theta));
    let svg = svg.map(Path::to_path_buf).unwrap_or_else(|| out.with_extension("svg"));
    write_text(&svg, &plot.render())?;
    println!(
        "wrote {} and {} ({} orbits)",
        out.display(),
        svg.display(),
        portrait.orbits.len()
    );
    let parts: Vec<(&str, Status)> = portrait.orbits.iter().map(|o| ("phase orbit", o.status)).collect();
    Ok(status_outcome(&parts))
}

fn write_table(table: &ParameterTable, cfg: &SolverConfig, out: &Path) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("# family = {}\n", table.family.name()));
    for (k, v) in [("rtol", cfg.rtol), ("atol", cfg.atol), ("event_tol", cfg.event_tol)] {
        text.push_str(&format!("# {k} = {}\n", curve_file::fmt_f64(v)));
    }
    text.push_str(&format!("# injective = {}\n", table.injective));
    text.push_str(&format!("# version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&table.columns.join(","));
    text.push('\n');
    let cell = |v: Option<f64>| v.map(curve_file::fmt_f64).unwrap_or_default();
    for r in &table.rows {
        text.push_str(&format!(
            "{},{},{}\n",
            curve_file::fmt_f64(r.z0),
            cell(r.value),
            cell(r.location)
        ));
    }
    write_text(out, &text)
}

fn cmd_table(family: &str, grid: &[f64], out: Option<&Path>, solver: &SolverFlags) -> Result<Outcome> {
    let cfg = solver.resolve()?;
    let family = CurveFamily::parse(family).ok_or_else(|| Error::Precondition(format!("unknown family `{family}`")))?;
    let table = parameter_table(family, grid, &cfg)?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("table.csv"));
    write_table(&table, &cfg, &out)?;
    write_json(&out.with_extension("json"), &table)?;
    println!(
        "wrote {} ({} rows, injective: {})",
        out.display(),
        table.rows.len(),
        table.injective
    );
    Ok(Outcome::Done)
}

fn cmd_verify(input: &Path, family: Option<&str>, out: Option<&Path>) -> Result<Outcome> {
    let family = match family {
        Some(name) => {
            Some(CurveFamily::parse(name).ok_or_else(|| Error::Precondition(format!("unknown family `{name}`")))?)
        }
        None => None,
    };
    let file = CurveFile::read(BufReader::new(File::open(input)?), family)?;
    let report = file.report()?;
    match out {
        Some(path) => write_json(path, &report)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &report)?;
            stdout.write_all(b"\n")?;
        }
    }
    Ok(Outcome::Done)
}
