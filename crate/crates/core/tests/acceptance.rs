//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;

use horoshrinker::analysis::{
    oscillation_report, parameter_table, phase_portrait, OrbitKind, OscillationSource, PhasePortraitSpec,
};
use horoshrinker::geometry::{shrinker_residual, CurveFamily, GeneratingCurve};
use horoshrinker::grim::{
    default_spacing, finite_difference_jacobian, grim_period, linearization_at_equilibrium, solve_grim,
    solve_grim_from, solve_grim_sampled, z0_from_star, z0_star_map, GrimClassification, PhasePoint,
};
use horoshrinker::ode::{EventKind, SolverConfig, Status};
use horoshrinker::rotational::{
    default_bowl_spacing, energy_identity_residual, solve_bowl, solve_bowl_with, solve_wing, solve_wing_sampled,
    BowlOptions, StarterComparison, DEFAULT_WING_SPACING,
};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn max_residual(curve: &GeneratingCurve) -> (f64, usize) {
    let r = shrinker_residual(curve, curve.family.symmetry()).unwrap();
    (r.max_residual, r.samples)
}

fn residual_oracle() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut record = |name: String, coarse: (f64, usize), fine: (f64, usize)| {
        let order = (coarse.0 / fine.0).log2();
        let pass = coarse.0 <= 1e-5 && coarse.1 >= 2000 && order >= 1.95;
        ok &= pass;
        lines.push(format!(
            "{name}: max {:.2e} over {} samples, order {order:.3}",
            coarse.0, coarse.1
        ));
    };
    for z0 in [0.2, 0.5] {
        let h = default_spacing(z0).unwrap();
        let run = |h: f64| max_residual(&solve_grim_sampled(z0, (-10.0, 10.0), h, &cfg()).unwrap().curve());
        record(format!("grim {z0}"), run(h), run(h / 2.0));
    }
    for z0 in [0.5, 2.0] {
        let h = default_bowl_spacing(z0).unwrap();
        let run = |h: f64| {
            let opts = BowlOptions {
                spacing: Some(h),
                ..Default::default()
            };
            max_residual(&solve_bowl_with(z0, 30.0, &opts, &cfg()).unwrap().curve())
        };
        record(format!("bowl {z0}"), run(h), run(h / 2.0));
    }
    for (x0, z0) in [(1.0, 1.0), (1.0, 2.0)] {
        let run = |h: f64| max_residual(&solve_wing_sampled(x0, z0, 20.0, h, &cfg()).unwrap().curve());
        record(
            format!("wing ({x0},{z0})"),
            run(DEFAULT_WING_SPACING),
            run(DEFAULT_WING_SPACING / 2.0),
        );
    }
    ensure(ok, lines.join("; "))
}

fn first_integral_conservation() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for z0 in [0.2, 0.5, 0.9] {
        let o = solve_grim(z0, (-50.0, 50.0), &cfg()).unwrap();
        let exact = 0.0_f64.cos() * (-2.0 / z0).exp() / (z0 * z0);
        let bound = 1e-8 * (1.0 + o.first_integral_c.abs());
        ok &= o.first_integral_c == exact && o.first_integral_drift <= bound && o.status == Status::Completed;
        lines.push(format!(
            "z0={z0}: c exact {}, drift {:.2e} (bound {bound:.2e})",
            o.first_integral_c == exact,
            o.first_integral_drift
        ));
    }
    ensure(ok, lines.join("; "))
}

fn grim_periodicity() -> Check {
    let z0 = 0.5;
    let o = solve_grim(z0, (-20.0, 20.0), &cfg()).unwrap();
    let star = grim_period(z0, &cfg()).unwrap().z0_star;
    let p = &o.periods;
    let spread = if p.len() >= 3 {
        p.windows(3)
            .map(|w| {
                let mean = (w[0] + w[1] + w[2]) / 3.0;
                (w.iter().cloned().fold(f64::MIN, f64::max) - w.iter().cloned().fold(f64::MAX, f64::min)) / mean
            })
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let report = oscillation_report(OscillationSource::Grim(&o)).unwrap();
    let min_err = o
        .extrema()
        .filter(|e| e.kind == EventKind::ZExtremumMin)
        .map(|e| (e.state[1] - z0).abs())
        .fold(0.0, f64::max);
    let max_err = o
        .extrema()
        .filter(|e| e.kind == EventKind::ZExtremumMax)
        .map(|e| (e.state[1] - star).abs() / star)
        .fold(0.0, f64::max);
    let back = z0_from_star(z0_star_map(z0, &cfg()).unwrap(), &cfg()).unwrap();
    let ok = spread <= 1e-6
        && report.alternates
        && min_err <= 1e-8
        && max_err <= 1e-8
        && star > 1.0
        && (back - z0).abs() <= 1e-7;
    ensure(ok, format!(
        "{} periods, spread {spread:.2e}; alternates {}; |min - z0| {min_err:.2e}; |max - z0*|/z0* {max_err:.2e} (z0* = {star:.10}); round trip {:.2e}",
        p.len(), report.alternates, (back - z0).abs()
    ))
}

fn extrema_height_law() -> Check {
    let mut heights: Vec<(EventKind, f64)> = Vec::new();
    for z0 in [0.2, 0.5, 0.9] {
        let o = solve_grim(z0, (-50.0, 50.0), &cfg()).unwrap();
        heights.extend(o.extrema().map(|e| (e.kind, e.state[1])));
    }
    for z0 in [0.5, 2.0] {
        let b = solve_bowl(z0, 30.0, &cfg()).unwrap();
        heights.extend(b.extrema.iter().map(|e| (e.kind, e.state[0])));
    }
    for (x0, z0) in [(1.0, 1.0), (1.0, 2.0)] {
        let w = solve_wing(x0, z0, 20.0, &cfg()).unwrap();
        heights.extend(
            w.upper_extrema
                .iter()
                .chain(&w.lower_extrema)
                .map(|e| (e.kind, e.state[1])),
        );
    }
    let bad = heights
        .iter()
        .filter(|(k, z)| match k {
            EventKind::ZExtremumMax => *z <= 1.0,
            _ => *z >= 1.0,
        })
        .count();
    ensure(
        bad == 0 && !heights.is_empty(),
        format!("{} extrema, {bad} on the wrong side of 1", heights.len()),
    )
}

fn axis_start() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for z0 in [0.5, 2.0] {
        let s = StarterComparison::compute(z0, 1e-3).unwrap();
        let decreasing = s.picard_deltas.windows(2).all(|w| w[1] < w[0]);
        let last = *s.picard_deltas.last().unwrap();
        let expected = (1.0 - z0) / (z0 * z0);
        let dz2 = (s.axis_second_derivative - expected).abs();
        ok &= decreasing && last < 1e-12 && s.z_difference <= 1e-9 && s.r_switch == 1e-3 && dz2 <= 1e-6;
        lines.push(format!(
            "z0={z0}: {} Picard iterations, decreasing {decreasing}, final delta {last:.2e}, series vs Picard {:.2e}, z''(0) = {:.9} (error {dz2:.2e})",
            s.picard_iterations, s.z_difference, s.axis_second_derivative
        ));
    }
    ensure(ok, lines.join("; "))
}

fn energy_identity() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    let free = BowlOptions {
        spacing: None,
        ..Default::default()
    };
    for z0 in [0.5, 2.0] {
        let sampled = energy_identity_residual(&solve_bowl(z0, 30.0, &cfg()).unwrap()).unwrap();
        let coarse = energy_identity_residual(&solve_bowl_with(z0, 30.0, &free, &cfg()).unwrap()).unwrap();
        let fine =
            energy_identity_residual(&solve_bowl_with(z0, 30.0, &free, &cfg().tightened(10.0)).unwrap()).unwrap();
        let ratio = coarse / fine;
        ok &= sampled <= 1e-6 && coarse <= 1e-6 && ratio >= 10.0;
        lines.push(format!(
            "z0={z0}: residual {sampled:.2e} sampled, {coarse:.2e} free-step, {fine:.2e} at 10x tighter (improvement {ratio:.2}x)"
        ));
    }
    ensure(ok, lines.join("; "))
}

fn wing_structure() -> Check {
    let w = solve_wing(1.0, 2.0, 20.0, &cfg()).unwrap();
    let upper = oscillation_report(OscillationSource::WingUpper(&w)).unwrap();
    let lower = oscillation_report(OscillationSource::WingLower(&w)).unwrap();
    let one_critical = w.x_critical_points == [0.0];
    let min_at_waist = w.min_x_at == 0.0 && w.min_x == w.x0;
    let xpp = (w.waist_second_derivative - 1.0 / w.x0).abs();
    let osc = |r: &horoshrinker::analysis::OscillationReport| r.straddles_one && r.alternates && r.extrema.len() >= 2;
    ensure(
        one_critical && min_at_waist && xpp <= 1e-6 && osc(&upper) && osc(&lower),
        format!(
            "critical points {:?}, min x {} at s = {}, x'' error {xpp:.2e}, upper {} extrema straddling {}, lower {} extrema straddling {}",
            w.x_critical_points, w.min_x, w.min_x_at, upper.extrema.len(), upper.straddles_one, lower.extrema.len(), lower.straddles_one
        ),
    )
}

fn linearization() -> Check {
    let l = linearization_at_equilibrium();
    let matrix = l.matrix == [[0.0, 1.0], [-2.0, 0.0]];
    let sqrt2 = 2f64.sqrt();
    let eig = l.eigenvalues.iter().all(|(re, _)| *re == 0.0)
        && (l.eigenvalues[0].1.abs() - sqrt2).abs() <= 1e-15
        && l.eigenvalues[0].1 == -l.eigenvalues[1].1;
    let fd = finite_difference_jacobian(PhasePoint::EQUILIBRIUM, 1e-6).unwrap();
    let fd_err = (0..4)
        .map(|k| (fd[k / 2][k % 2] - l.matrix[k / 2][k % 2]).abs())
        .fold(0.0, f64::max);
    let spec = PhasePortraitSpec::new([0.2, 1.1, 2.0, 5.0].iter().map(|&z| PhasePoint::new(z, 0.0)).collect());
    let portrait = phase_portrait(&spec, &cfg()).unwrap();
    let loops: Vec<f64> = portrait
        .orbits
        .iter()
        .filter(|o| o.kind == OrbitKind::ClosedLoop)
        .map(|o| o.closure_error.unwrap_or(f64::INFINITY))
        .collect();
    let closure = loops.iter().cloned().fold(0.0, f64::max);
    ensure(
        matrix && eig && l.is_center && fd_err <= 1e-6 && loops.len() == 4 && closure <= 1e-6,
        format!(
            "matrix {:?}, eigenvalues {:?}, FD error {fd_err:.2e}, {} loops closing to {closure:.2e}",
            l.matrix,
            l.eigenvalues,
            loops.len()
        ),
    )
}

fn horosphere_exact(curve: &GeneratingCurve) -> bool {
    curve.samples.iter().all(|p| p.z == 1.0 && p.theta == 0.0) && max_residual(curve).0 == 0.0
}

fn trivial_solutions() -> Check {
    let grim = solve_grim(1.0, (-10.0, 10.0), &cfg()).unwrap();
    let grim_ok = grim.classification == GrimClassification::HorosphereH1 && horosphere_exact(&grim.curve());
    let bowl = solve_bowl(1.0, 30.0, &cfg()).unwrap();
    let bowl_ok = horosphere_exact(&bowl.curve())
        && bowl.samples.iter().all(|p| p.dz == 0.0 && p.energy_integral == 0.0)
        && energy_identity_residual(&bowl).unwrap() == 0.0;
    let portrait = phase_portrait(&PhasePortraitSpec::new(vec![PhasePoint::new(1.0, 0.0)]), &cfg()).unwrap();
    let phase_ok = portrait.orbits[0].kind == OrbitKind::Equilibrium
        && portrait.orbits[0].points.iter().all(|p| *p == PhasePoint::EQUILIBRIUM);
    let table_ok = [CurveFamily::Grim, CurveFamily::Bowl].iter().all(|&f| {
        let t = parameter_table(f, &[1.0], &cfg()).unwrap();
        t.rows[0].value.map_or(true, |v| v == 1.0)
    });
    let plane = solve_grim_from(
        PhasePoint::new(0.7, std::f64::consts::FRAC_PI_2),
        (-3.0, 3.0),
        0.01,
        &cfg(),
    )
    .unwrap();
    let plane_residual = max_residual(&plane.curve()).0;
    let plane_ok = plane.classification == GrimClassification::VerticalPlane && plane_residual == 0.0;
    ensure(
        grim_ok && bowl_ok && phase_ok && table_ok && plane_ok,
        format!("grim {grim_ok}, bowl {bowl_ok}, phase {phase_ok}, table {table_ok}, vertical plane residual {plane_residual:e}"),
    )
}

fn run_twice(dir: &Path, name: &str, args: &[&str], outputs: &[&str]) -> Result<(), String> {
    let mut files: Vec<Vec<Vec<u8>>> = Vec::new();
    for run in ["a", "b"] {
        let sub = dir.join(format!("{name}-{run}"));
        std::fs::create_dir_all(&sub).unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_horoshrinker"))
            .args(args)
            .current_dir(&sub)
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return Err(format!("{name} exited with {status}"));
        }
        files.push(outputs.iter().map(|f| std::fs::read(sub.join(f)).unwrap()).collect());
    }
    match outputs
        .iter()
        .zip(files[0].iter().zip(&files[1]))
        .find(|(_, (a, b))| a != b)
    {
        Some((f, _)) => Err(format!("{name}: {f} differs")),
        None => Ok(()),
    }
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str], &[&str]); 5] = [
        (
            "grim",
            &["grim", "--z0", "0.2", "--out", "c.csv", "--svg", "c.svg"],
            &["c.csv", "c.report.json", "c.events.json", "c.svg"],
        ),
        (
            "bowl",
            &["bowl", "--z0", "0.5", "--out", "c.csv", "--svg", "c.svg"],
            &["c.csv", "c.report.json", "c.events.json", "c.picard.json", "c.svg"],
        ),
        (
            "wing",
            &["wing", "--x0", "1", "--z0", "2", "--out", "c.csv", "--svg", "c.svg"],
            &["c.csv", "c.report.json", "c.events.json", "c.svg"],
        ),
        (
            "phase",
            &["phase", "--out", "p.json", "--svg", "p.svg"],
            &["p.json", "p.svg"],
        ),
        (
            "table",
            &["table", "--family", "grim", "--grid", "0.3,0.5,0.7", "--out", "t.csv"],
            &["t.csv", "t.json"],
        ),
    ];
    let mut failures = Vec::new();
    for (name, args, outputs) in cases {
        if let Err(e) = run_twice(dir.path(), name, args, outputs) {
            failures.push(e);
        }
    }
    let a = solve_bowl(2.0, 30.0, &cfg()).unwrap();
    let b = solve_bowl(2.0, 30.0, &cfg()).unwrap();
    if a.samples != b.samples || a.extrema != b.extrema {
        failures.push("library bowl differs between runs".into());
    }
    ensure(
        failures.is_empty(),
        if failures.is_empty() {
            "grim, bowl, wing, phase and table outputs byte-identical across two runs".into()
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("residual oracle", residual_oracle),
        ("first-integral conservation", first_integral_conservation),
        ("grim periodicity", grim_periodicity),
        ("extrema-height law", extrema_height_law),
        ("axis start", axis_start),
        ("energy identity", energy_identity),
        ("wing structure", wing_structure),
        ("linearization", linearization),
        ("trivial solutions", trivial_solutions),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
