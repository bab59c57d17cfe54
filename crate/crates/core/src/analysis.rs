//! Phase portraits, oscillation statistics and parameter tables.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::CurveFamily;
use crate::grim::{grim_field, grim_period, GrimOrbit, PhasePoint};
use crate::ode::{field_fn, Event, EventKind, EventSpec, Integrator, OutOfDomain, SolverConfig, Status};
use crate::rotational::{solve_bowl, BowlCurve, WingCurve};

/// Samples per closed loop.
pub const LOOP_SAMPLES: usize = 720;
/// Radius used for bowl rows of [`parameter_table`].
pub const TABLE_BOWL_RADIUS: f64 = 30.0;
/// Smallest separation of table values accepted as distinct.
pub const INJECTIVITY_SEPARATION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortraitSpec {
    pub z_range: (f64, f64),
    pub theta_range: (f64, f64),
    pub seeds: Vec<PhasePoint>,
    /// Arc length traced in each direction for seeds off `θ = 0`.
    pub span: f64,
}

impl PhasePortraitSpec {
    pub fn new(seeds: Vec<PhasePoint>) -> Self {
        Self {
            z_range: (0.05, 6.0),
            theta_range: (-FRAC_PI_2, FRAC_PI_2),
            seeds,
            span: 20.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (z_lo, z_hi) = self.z_range;
        let (t_lo, t_hi) = self.theta_range;
        if !(z_lo > 0.0 && z_hi > z_lo && z_hi.is_finite()) {
            return domain(format!("height range must satisfy 0 < lo < hi, got ({z_lo}, {z_hi})"));
        }
        if !(t_lo >= -FRAC_PI_2 && t_hi <= FRAC_PI_2 && t_hi > t_lo) {
            return domain(format!("angle range must lie in [-pi/2, pi/2], got ({t_lo}, {t_hi})"));
        }
        if !(self.span > 0.0) || !self.span.is_finite() {
            return Err(Error::Precondition(format!("span must be positive, got {}", self.span)));
        }
        for p in &self.seeds {
            let inside = p.z >= z_lo && p.z <= z_hi && p.theta >= t_lo && p.theta <= t_hi;
            if !inside || p.theta.abs() >= FRAC_PI_2 {
                return domain(format!("seed ({}, {}) lies outside the phase window", p.z, p.theta));
            }
        }
        Ok(())
    }
}

/// Lines of the phase plane where one component of the field changes sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nullcline {
    /// `z = value`; `θ'` vanishes.
    Height(f64),
    /// `θ = value`; `z'` vanishes.
    Angle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitKind {
    Equilibrium,
    /// Seed on `θ = 0`: traced for exactly one period.
    ClosedLoop,
    /// Traced over `[-span, span]`.
    Traced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOrbit {
    pub seed: PhasePoint,
    pub kind: OrbitKind,
    pub points: Vec<PhasePoint>,
    pub period_s: Option<f64>,
    /// Distance from the seed after one period.
    pub closure_error: Option<f64>,
    /// Hausdorff distance between the loop and its mirror image in `θ = 0`.
    pub symmetry_error: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    pub spec: PhasePortraitSpec,
    pub orbits: Vec<PhaseOrbit>,
    pub nullclines: Vec<Nullcline>,
    pub equilibrium: PhasePoint,
}

fn phase_system() -> impl crate::ode::VectorField + Sync {
    field_fn(2, |_, y, dy| {
        let (dz, dt) = grim_field(PhasePoint::new(y[0], y[1])).map_err(|e| OutOfDomain(e.to_string()))?;
        if y[1].abs() >= FRAC_PI_2 {
            return Err(OutOfDomain(format!("theta = {} left the strip", y[1])));
        }
        dy[0] = dz;
        dy[1] = dt;
        Ok(())
    })
}

pub fn phase_portrait(spec: &PhasePortraitSpec, config: &SolverConfig) -> Result<PhasePortrait> {
    spec.validate()?;
    config.validate()?;
    let orbits = spec
        .seeds
        .par_iter()
        .map(|&seed| phase_orbit(seed, spec.span, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhasePortrait {
        spec: spec.clone(),
        orbits,
        nullclines: vec![Nullcline::Height(1.0), Nullcline::Angle(0.0)],
        equilibrium: PhasePoint::EQUILIBRIUM,
    })
}

fn phase_orbit(seed: PhasePoint, span: f64, config: &SolverConfig) -> Result<PhaseOrbit> {
    if seed == PhasePoint::EQUILIBRIUM {
        return Ok(PhaseOrbit {
            seed,
            kind: OrbitKind::Equilibrium,
            points: vec![seed],
            period_s: None,
            closure_error: None,
            symmetry_error: None,
            status: Status::Completed,
        });
    }
    if seed.theta == 0.0 {
        return closed_loop(seed, config);
    }
    let field = phase_system();
    let y0 = [seed.z, seed.theta];
    let n = 2000;
    let h = span / n as f64;
    let back = Integrator::new(&field, *config)
        .stops((1..=n).map(|k| -(k as f64) * h).collect())
        .grid_only()
        .run(&y0, (0.0, -span))?;
    let fwd = Integrator::new(&field, *config)
        .stops((1..=n).map(|k| k as f64 * h).collect())
        .grid_only()
        .run(&y0, (0.0, span))?;
    let mut points: Vec<PhasePoint> = back
        .trajectory
        .grid_points()
        .skip(1)
        .map(|(_, y)| PhasePoint::new(y[0], y[1]))
        .collect();
    points.reverse();
    points.extend(fwd.trajectory.grid_points().map(|(_, y)| PhasePoint::new(y[0], y[1])));
    let status = if back.status != Status::Completed {
        back.status
    } else {
        fwd.status
    };
    Ok(PhaseOrbit {
        seed,
        kind: OrbitKind::Traced,
        points,
        period_s: None,
        closure_error: None,
        symmetry_error: None,
        status,
    })
}

fn closed_loop(seed: PhasePoint, config: &SolverConfig) -> Result<PhaseOrbit> {
    let field = phase_system();
    let y0 = [seed.z, 0.0];
    let same = if seed.z < 1.0 {
        EventKind::ZExtremumMin
    } else {
        EventKind::ZExtremumMax
    };
    let mut span = 40.0;
    let period = loop {
        let sol = Integrator::new(&field, *config)
            .event(EventSpec::z_extremum(0).terminal_on(same))
            .grid_only()
            .run(&y0, (0.0, span))?;
        match sol.status {
            Status::Terminated => break sol.events.last().expect("terminal event recorded").clone(),
            Status::Completed if span < 1e5 => span *= 4.0,
            status => {
                return Err(Error::Precondition(format!(
                    "no return to the seed ({}, 0) found ({status:?})",
                    seed.z
                )))
            }
        }
    };
    let t = period.s;
    let closure = (period.state[0] - seed.z).hypot(period.state[1]);
    let stops: Vec<f64> = (1..=LOOP_SAMPLES).map(|k| t * k as f64 / LOOP_SAMPLES as f64).collect();
    let sol = Integrator::new(&field, *config)
        .stops(stops)
        .grid_only()
        .run(&y0, (0.0, t))?;
    let points: Vec<PhasePoint> = sol
        .trajectory
        .grid_points()
        .map(|(_, y)| PhasePoint::new(y[0], y[1]))
        .collect();
    let mirror: Vec<PhasePoint> = points.iter().map(|p| PhasePoint::new(p.z, -p.theta)).collect();
    Ok(PhaseOrbit {
        seed,
        kind: OrbitKind::ClosedLoop,
        symmetry_error: Some(hausdorff(&points, &mirror)),
        points,
        period_s: Some(t),
        closure_error: Some(closure),
        status: sol.status,
    })
}

/// Hausdorff distance between two finite point sets in the `(z, θ)` plane.
pub fn hausdorff(a: &[PhasePoint], b: &[PhasePoint]) -> f64 {
    let directed = |from: &[PhasePoint], to: &[PhasePoint]| {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p.z - q.z).hypot(p.theta - q.theta))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    /// Arc length, radius or `|s|` from the waist, depending on the curve.
    pub location: f64,
    pub height: f64,
    pub kind: ExtremumKind,
}

/// Least-squares fit of `log |z - 1| = c_kind - rate · location`, one slope for
/// maxima and minima together and one intercept per kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept_max: Option<f64>,
    pub intercept_min: Option<f64>,
    pub r_squared: f64,
}

/// Empirical amplitude statistics. The decay of rotational oscillations towards
/// the horosphere is observed, not proven; `fitted_decay` describes data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub extrema: Vec<Extremum>,
    /// `|height - 1|` per extremum.
    pub amplitudes: Vec<f64>,
    pub fitted_decay: Option<DecayFit>,
    /// Amplitudes of the maxima and of the minima each strictly decrease.
    pub monotone_decay: bool,
    pub alternates: bool,
    /// Every maximum lies above 1 and every minimum below.
    pub straddles_one: bool,
    /// Largest spread of the amplitudes within one kind.
    pub amplitude_spread: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum OscillationSource<'a> {
    Grim(&'a GrimOrbit),
    Bowl(&'a BowlCurve),
    WingUpper(&'a WingCurve),
    WingLower(&'a WingCurve),
}

fn extremum_of(e: &Event, height_index: usize, location: f64) -> Option<Extremum> {
    let kind = match e.kind {
        EventKind::ZExtremumMax => ExtremumKind::Max,
        EventKind::ZExtremumMin => ExtremumKind::Min,
        _ => return None,
    };
    Some(Extremum {
        location,
        height: e.state[height_index],
        kind,
    })
}

pub fn oscillation_report(source: OscillationSource<'_>) -> Result<OscillationReport> {
    let (mut extrema, fit): (Vec<Extremum>, bool) = match source {
        OscillationSource::Grim(o) => {
            let mut v: Vec<Extremum> = o.events.iter().filter_map(|e| extremum_of(e, 1, e.s)).collect();
            // The start is not reported as an event.
            if o.start.theta == 0.0 && o.start.z != 1.0 {
                let kind = if o.start.z < 1.0 {
                    ExtremumKind::Min
                } else {
                    ExtremumKind::Max
                };
                v.push(Extremum {
                    location: 0.0,
                    height: o.start.z,
                    kind,
                });
            }
            (v, false)
        }
        OscillationSource::Bowl(b) => (b.extrema.iter().filter_map(|e| extremum_of(e, 0, e.s)).collect(), true),
        OscillationSource::WingUpper(w) => (
            w.upper_extrema.iter().filter_map(|e| extremum_of(e, 1, e.s)).collect(),
            true,
        ),
        OscillationSource::WingLower(w) => (
            w.lower_extrema.iter().filter_map(|e| extremum_of(e, 1, -e.s)).collect(),
            true,
        ),
    };
    extrema.sort_by(|a, b| a.location.total_cmp(&b.location));
    report_from_extrema(extrema, fit)
}

/// Builds the report from extrema sorted by location.
pub fn report_from_extrema(extrema: Vec<Extremum>, fit: bool) -> Result<OscillationReport> {
    if extrema.len() < 2 {
        return Err(Error::Precondition(format!(
            "need at least 2 extrema, found {}",
            extrema.len()
        )));
    }
    let amplitudes: Vec<f64> = extrema.iter().map(|e| (e.height - 1.0).abs()).collect();
    let alternates = extrema.windows(2).all(|w| w[0].kind != w[1].kind);
    let straddles_one = extrema.iter().all(|e| match e.kind {
        ExtremumKind::Max => e.height > 1.0,
        ExtremumKind::Min => e.height < 1.0,
    });
    let per_kind = |kind: ExtremumKind| -> Vec<(f64, f64)> {
        extrema
            .iter()
            .zip(&amplitudes)
            .filter(|(e, _)| e.kind == kind)
            .map(|(e, a)| (e.location, *a))
            .collect()
    };
    let (maxima, minima) = (per_kind(ExtremumKind::Max), per_kind(ExtremumKind::Min));
    let decreasing = |v: &[(f64, f64)]| v.windows(2).all(|w| w[1].1 < w[0].1);
    let monotone_decay = (maxima.len() >= 2 || minima.len() >= 2) && decreasing(&maxima) && decreasing(&minima);
    let spread = |v: &[(f64, f64)]| {
        let lo = v.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if v.is_empty() {
            0.0
        } else {
            hi - lo
        }
    };
    let amplitude_spread = spread(&maxima).max(spread(&minima));
    let fitted_decay = if fit { decay_fit(&maxima, &minima) } else { None };
    Ok(OscillationReport {
        extrema,
        amplitudes,
        fitted_decay,
        monotone_decay,
        alternates,
        straddles_one,
        amplitude_spread,
    })
}

fn decay_fit(maxima: &[(f64, f64)], minima: &[(f64, f64)]) -> Option<DecayFit> {
    let groups: Vec<Vec<(f64, f64)>> = [maxima, minima]
        .iter()
        .map(|g| g.iter().filter(|p| p.1 > 0.0).map(|&(x, a)| (x, a.ln())).collect())
        .collect();
    let mean = |g: &[(f64, f64)]| {
        let n = g.len() as f64;
        (
            g.iter().map(|p| p.0).sum::<f64>() / n,
            g.iter().map(|p| p.1).sum::<f64>() / n,
        )
    };
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for g in groups.iter().filter(|g| !g.is_empty()) {
        let (mx, my) = mean(g);
        for &(x, y) in g {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    if n < 3 || !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = |g: &[(f64, f64)]| {
        if g.is_empty() {
            None
        } else {
            let (mx, my) = mean(g);
            Some(my - slope * mx)
        }
    };
    let (c_max, c_min) = (intercept(&groups[0]), intercept(&groups[1]));
    let all: Vec<f64> = groups.iter().flatten().map(|p| p.1).collect();
    let ybar = all.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = all.iter().map(|y| (y - ybar).powi(2)).sum();
    let mut ss_res = 0.0;
    for (g, c) in groups.iter().zip([c_max, c_min]) {
        if let Some(c) = c {
            ss_res += g.iter().map(|&(x, y)| (y - c - slope * x).powi(2)).sum::<f64>();
        }
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(DecayFit {
        rate: -slope,
        intercept_max: c_max,
        intercept_min: c_min,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub z0: f64,
    /// `z0*` for grim reapers, the first maximum height for bowls.
    pub value: Option<f64>,
    /// `x`-period for grim reapers, the first maximum radius for bowls.
    pub location: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterTable {
    pub family: CurveFamily,
    pub columns: [String; 3],
    pub rows: Vec<TableRow>,
    /// Smallest gap between `value`s of distinct rows.
    pub min_separation: Option<f64>,
    pub injective: bool,
}

pub fn parameter_table(family: CurveFamily, grid: &[f64], config: &SolverConfig) -> Result<ParameterTable> {
    if grid.is_empty() {
        return Err(Error::Precondition("parameter grid is empty".into()));
    }
    config.validate()?;
    let columns: [&str; 3] = match family {
        CurveFamily::Grim => {
            if let Some(z) = grid.iter().find(|z| !(**z > 0.0 && **z <= 1.0)) {
                return domain(format!("grim grid values must lie in (0, 1], got {z}"));
            }
            ["z0", "z0_star", "period_x"]
        }
        CurveFamily::Bowl => {
            if let Some(z) = grid.iter().find(|z| !(**z > 0.0) || !z.is_finite()) {
                return domain(format!("bowl grid values must be positive, got {z}"));
            }
            ["z0", "first_max_height", "first_max_r"]
        }
        CurveFamily::Wing => return Err(Error::Precondition("no parameter table is defined for wings".into())),
    };
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("parameter grid contains duplicates".into()));
    }
    let rows = grid
        .par_iter()
        .map(|&z0| table_row(family, z0, config))
        .collect::<Result<Vec<_>>>()?;
    let mut values: Vec<f64> = rows.iter().filter_map(|r| r.value).collect();
    values.sort_by(f64::total_cmp);
    let min_separation = values.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
    Ok(ParameterTable {
        family,
        columns: columns.map(String::from),
        rows,
        injective: min_separation.map_or(true, |d| d > INJECTIVITY_SEPARATION),
        min_separation,
    })
}

fn table_row(family: CurveFamily, z0: f64, config: &SolverConfig) -> Result<TableRow> {
    match family {
        CurveFamily::Grim if z0 == 1.0 => Ok(TableRow {
            z0,
            value: Some(1.0),
            location: None,
        }),
        CurveFamily::Grim => {
            let p = grim_period(z0, config)?;
            Ok(TableRow {
                z0,
                value: Some(p.z0_star),
                location: Some(p.period_x),
            })
        }
        _ => {
            let bowl = solve_bowl(z0, TABLE_BOWL_RADIUS, config)?;
            let first = bowl.maxima().next();
            Ok(TableRow {
                z0,
                value: first.map(|e| e.state[0]),
                location: first.map(|e| e.s),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grim::solve_grim;
    use crate::rotational::solve_wing;

    #[test]
    fn equilibrium_seed_is_a_point() {
        let spec = PhasePortraitSpec::new(vec![PhasePoint::EQUILIBRIUM]);
        let p = phase_portrait(&spec, &SolverConfig::default()).unwrap();
        assert_eq!(p.orbits[0].kind, OrbitKind::Equilibrium);
        assert_eq!(p.orbits[0].points, vec![PhasePoint::EQUILIBRIUM]);
        assert_eq!(p.nullclines, vec![Nullcline::Height(1.0), Nullcline::Angle(0.0)]);
    }

    #[test]
    fn loops_close_and_are_symmetric() {
        let seeds = [0.2, 1.1, 2.0, 5.0].map(|z| PhasePoint::new(z, 0.0)).to_vec();
        let p = phase_portrait(&PhasePortraitSpec::new(seeds), &SolverConfig::default()).unwrap();
        for o in &p.orbits {
            assert_eq!(o.kind, OrbitKind::ClosedLoop);
            assert!(o.closure_error.unwrap() <= 1e-6, "{:?}", o.closure_error);
            assert!(o.symmetry_error.unwrap() <= 1e-6, "{:?}", o.symmetry_error);
            assert_eq!(o.points.len(), LOOP_SAMPLES + 1);
            // Loops wind around the equilibrium.
            assert!(o.points.iter().any(|q| q.z > 1.0) && o.points.iter().any(|q| q.z < 1.0));
        }
    }

    #[test]
    fn traced_orbit_keeps_first_integral() {
        let seed = PhasePoint::new(0.7, 0.4);
        let p = phase_portrait(&PhasePortraitSpec::new(vec![seed]), &SolverConfig::default()).unwrap();
        let o = &p.orbits[0];
        assert_eq!(o.kind, OrbitKind::Traced);
        let c0 = crate::grim::first_integral(seed).unwrap();
        for q in &o.points {
            assert!((crate::grim::first_integral(*q).unwrap() - c0).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_specs() {
        let cfg = SolverConfig::default();
        assert!(phase_portrait(&PhasePortraitSpec::new(vec![PhasePoint::new(-1.0, 0.0)]), &cfg).is_err());
        assert!(phase_portrait(&PhasePortraitSpec::new(vec![PhasePoint::new(1.0, FRAC_PI_2)]), &cfg).is_err());
        let mut s = PhasePortraitSpec::new(vec![]);
        s.z_range = (2.0, 1.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let a = [PhasePoint::new(1.0, 0.0), PhasePoint::new(2.0, 0.0)];
        let b = [PhasePoint::new(1.0, 0.0)];
        assert_eq!(hausdorff(&a, &a), 0.0);
        assert_eq!(hausdorff(&a, &b), 1.0);
        assert_eq!(hausdorff(&b, &a), 1.0);
    }

    #[test]
    fn grim_amplitudes_are_constant() {
        let o = solve_grim(0.5, (-30.0, 30.0), &SolverConfig::default()).unwrap();
        let r = oscillation_report(OscillationSource::Grim(&o)).unwrap();
        assert!(r.alternates && r.straddles_one);
        assert!(r.amplitude_spread <= 1e-6, "{}", r.amplitude_spread);
        assert!(r.fitted_decay.is_none());
        assert!(!r.monotone_decay);
    }

    #[test]
    fn bowl_amplitudes_decrease() {
        let b = solve_bowl(0.5, 30.0, &SolverConfig::default()).unwrap();
        let r = oscillation_report(OscillationSource::Bowl(&b)).unwrap();
        assert!(r.alternates && r.straddles_one && r.monotone_decay);
        let fit = r.fitted_decay.unwrap();
        assert!(fit.rate > 0.0 && fit.r_squared > 0.5, "{fit:?}");
    }

    #[test]
    fn wing_branches_oscillate() {
        let w = solve_wing(1.0, 2.0, 20.0, &SolverConfig::default()).unwrap();
        for src in [OscillationSource::WingUpper(&w), OscillationSource::WingLower(&w)] {
            let r = oscillation_report(src).unwrap();
            assert!(r.alternates && r.straddles_one && r.monotone_decay);
            assert!(r.extrema.windows(2).all(|p| p[1].location > p[0].location));
        }
    }

    #[test]
    fn horosphere_has_no_oscillation() {
        let b = solve_bowl(1.0, 30.0, &SolverConfig::default()).unwrap();
        assert!(matches!(
            oscillation_report(OscillationSource::Bowl(&b)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn decay_fit_recovers_exponential() {
        let extrema: Vec<Extremum> = (0..8)
            .map(|i| {
                let x = i as f64;
                let (kind, c) = if i % 2 == 0 {
                    (ExtremumKind::Max, 0.5)
                } else {
                    (ExtremumKind::Min, 0.2)
                };
                let a = c * (-0.3 * x).exp();
                let height = if kind == ExtremumKind::Max { 1.0 + a } else { 1.0 - a };
                Extremum {
                    location: x,
                    height,
                    kind,
                }
            })
            .collect();
        let r = report_from_extrema(extrema, true).unwrap();
        let fit = r.fitted_decay.unwrap();
        assert!((fit.rate - 0.3).abs() < 1e-12);
        assert!((fit.intercept_max.unwrap() - 0.5f64.ln()).abs() < 1e-12);
        assert!((fit.intercept_min.unwrap() - 0.2f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grim_table() {
        let grid = [0.3, 0.5, 0.7, 1.0];
        let t = parameter_table(CurveFamily::Grim, &grid, &SolverConfig::default()).unwrap();
        assert!(t.injective);
        assert_eq!(
            t.rows[3],
            TableRow {
                z0: 1.0,
                value: Some(1.0),
                location: None
            }
        );
        assert!((t.rows[1].value.unwrap() - 2.4607768172837525).abs() < 1e-8);
        assert!((t.rows[1].location.unwrap() - 5.4008014091653601).abs() < 1e-8);
        let stars: Vec<f64> = t.rows.iter().map(|r| r.value.unwrap()).collect();
        assert!(stars.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn bowl_table() {
        let t = parameter_table(CurveFamily::Bowl, &[0.5, 1.0, 2.0], &SolverConfig::default()).unwrap();
        assert_eq!(t.columns[1], "first_max_height");
        assert!((t.rows[0].location.unwrap() - 2.199196).abs() < 1e-5);
        assert_eq!(t.rows[1].value, None);
        assert!(t.rows[2].value.unwrap() > 1.0);
    }

    #[test]
    fn invalid_grids() {
        let cfg = SolverConfig::default();
        assert!(parameter_table(CurveFamily::Grim, &[], &cfg).is_err());
        assert!(parameter_table(CurveFamily::Grim, &[1.5], &cfg).is_err());
        assert!(parameter_table(CurveFamily::Grim, &[0.5, 0.5], &cfg).is_err());
        assert!(parameter_table(CurveFamily::Wing, &[0.5], &cfg).is_err());
    }
}
