//! Grim reapers: horo-shrinkers invariant under horizontal translations.
//!
//! The generating curve `(x(s), z(s))` in hyperbolic arc length `s` with
//! tangent angle `θ` solves
//!
//! ```text
//! x' = z cos θ,   z' = z sin θ,   θ' = 2 cos θ (1 - z) / z.
//! ```
//!
//! The last two equations form an autonomous planar system on `(z, θ)` with a
//! single equilibrium `(1, 0)` (the horosphere `z = 1`) and the first integral
//! `c = cos θ · z⁻² · e^{-2/z}`. Every other orbit starting at `θ = 0` is a
//! closed loop around the equilibrium, so its generating curve is periodic in
//! `x`, oscillating between a minimum `z0 < 1` and a maximum `z0* > 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{CurveFamily, CurveSample, GeneratingCurve};
use crate::ode::{field_fn, Event, EventKind, EventSpec, Integrator, OutOfDomain, SolverConfig, Status};

/// Sample spacing in `s` for orbits that turn no faster than `|θ'| = 2`.
pub const BASE_SPACING: f64 = 0.005;

/// State `(z, θ)` of the reduced autonomous system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub z: f64,
    pub theta: f64,
}

impl PhasePoint {
    pub fn new(z: f64, theta: f64) -> Self {
        Self { z, theta }
    }

    pub const EQUILIBRIUM: PhasePoint = PhasePoint { z: 1.0, theta: 0.0 };
}

fn check_height(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("height must be positive and finite, got {z}"));
    }
    Ok(())
}

/// `(z', θ') = (z sin θ, 2 cos θ (1 - z) / z)`.
pub fn grim_field(p: PhasePoint) -> Result<(f64, f64)> {
    check_height(p.z)?;
    let (sin, cos) = p.theta.sin_cos();
    Ok((p.z * sin, 2.0 * cos * (1.0 - p.z) / p.z))
}

/// `cos θ / (z² e^{2/z})`, constant along every orbit.
pub fn first_integral(p: PhasePoint) -> Result<f64> {
    check_height(p.z)?;
    Ok(p.theta.cos() * (-2.0 / p.z).exp() / (p.z * p.z))
}

/// Analytic Jacobian of [`grim_field`] with respect to `(z, θ)`.
pub fn grim_jacobian(p: PhasePoint) -> Result<[[f64; 2]; 2]> {
    check_height(p.z)?;
    let (sin, cos) = p.theta.sin_cos();
    let z = p.z;
    Ok([[sin, z * cos], [-2.0 * cos / (z * z), -2.0 * sin * (1.0 - z) / z]])
}

/// Central-difference Jacobian of [`grim_field`] with step `h`.
pub fn finite_difference_jacobian(p: PhasePoint, h: f64) -> Result<[[f64; 2]; 2]> {
    let dz_plus = grim_field(PhasePoint::new(p.z + h, p.theta))?;
    let dz_minus = grim_field(PhasePoint::new(p.z - h, p.theta))?;
    let dt_plus = grim_field(PhasePoint::new(p.z, p.theta + h))?;
    let dt_minus = grim_field(PhasePoint::new(p.z, p.theta - h))?;
    let d = |a: f64, b: f64| (a - b) / (2.0 * h);
    Ok([
        [d(dz_plus.0, dz_minus.0), d(dt_plus.0, dt_minus.0)],
        [d(dz_plus.1, dz_minus.1), d(dt_plus.1, dt_minus.1)],
    ])
}

/// Linear part of the reduced system at the equilibrium `(1, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linearization {
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    pub determinant: f64,
    /// `(re, im)` of both eigenvalues.
    pub eigenvalues: [(f64, f64); 2],
    /// Purely imaginary eigenvalues: a linear center.
    pub is_center: bool,
}

pub fn linearization_at_equilibrium() -> Linearization {
    let m = grim_jacobian(PhasePoint::EQUILIBRIUM).expect("equilibrium has positive height");
    let trace = m[0][0] + m[1][1];
    let determinant = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(trace * trace - 4.0 * determinant, 0.0).sqrt();
    let l1 = (Complex64::new(trace, 0.0) + disc) / 2.0;
    let l2 = (Complex64::new(trace, 0.0) - disc) / 2.0;
    Linearization {
        matrix: m,
        trace,
        determinant,
        eigenvalues: [(l1.re, l1.im), (l2.re, l2.im)],
        is_center: trace == 0.0 && determinant > 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrimClassification {
    HorosphereH1,
    VerticalPlane,
    PeriodicGraph,
}

/// A sampled grim-reaper generating curve with its orbit data.
#[derive(Debug, Clone)]
pub struct GrimOrbit {
    /// Uniform in `s`; `x(0) = 0`.
    pub samples: Vec<CurveSample>,
    pub start: PhasePoint,
    /// Height of the minima (θ = 0, z < 1).
    pub z0: Option<f64>,
    /// Height of the maxima (θ = 0, z > 1).
    pub z0_star: Option<f64>,
    /// `x`-distance between the first two minima.
    pub period_x: Option<f64>,
    /// `x`-distances between all consecutive minima, in order of increasing `s`.
    pub periods: Vec<f64>,
    pub first_integral_c: f64,
    /// Largest `|c(sample) - c|` over the samples.
    pub first_integral_drift: f64,
    pub classification: GrimClassification,
    pub events: Vec<Event>,
    pub status: Status,
}

impl GrimOrbit {
    pub fn curve(&self) -> GeneratingCurve {
        GeneratingCurve::new(CurveFamily::Grim, self.samples.clone())
    }

    pub fn extrema(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::ZExtremumMax | EventKind::ZExtremumMin))
    }
}

fn grim_system() -> impl crate::ode::VectorField {
    field_fn(3, |_, y, dy| {
        let z = y[1];
        if !(z > 0.0) {
            return Err(OutOfDomain(format!("z = {z}")));
        }
        let (sin, cos) = y[2].sin_cos();
        dy[0] = z * cos;
        dy[1] = z * sin;
        dy[2] = 2.0 * cos * (1.0 - z) / z;
        Ok(())
    })
}

fn grim_events() -> Vec<EventSpec<'static>> {
    vec![
        EventSpec::level(EventKind::ThetaZero, 2, 0.0),
        EventSpec::level(EventKind::ZOne, 1, 1.0),
        EventSpec::z_extremum(1),
    ]
}

/// Grid `{k h}` inside `[lo, hi]`, plus both endpoints.
pub(crate) fn uniform_grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let k_lo = (lo / h).ceil() as i64;
    let k_hi = (hi / h).floor() as i64;
    let mut g: Vec<f64> = Vec::with_capacity((k_hi - k_lo + 3).max(0) as usize);
    if (k_lo as f64) * h > lo {
        g.push(lo);
    }
    g.extend((k_lo..=k_hi).map(|k| k as f64 * h));
    if g.last().map_or(true, |&l| l < hi) {
        g.push(hi);
    }
    g
}

fn validate_span(span: (f64, f64), spacing: f64) -> Result<()> {
    if !(span.0 <= 0.0 && span.1 >= 0.0 && span.0 < span.1) || !span.0.is_finite() || !span.1.is_finite() {
        return Err(Error::Precondition(format!(
            "span must be finite, contain s = 0 and be non-degenerate, got [{}, {}]",
            span.0, span.1
        )));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Precondition(format!(
            "sample spacing must be positive, got {spacing}"
        )));
    }
    Ok(())
}

/// The other height `w != z` on the same orbit level at `θ = 0`:
/// `w² e^{2/w} = z² e^{2/z}`, with `w > 1` when `z < 1` and conversely.
pub fn partner_height(z: f64) -> Result<f64> {
    check_height(z)?;
    if z == 1.0 {
        return Ok(1.0);
    }
    let level = 2.0 * z.ln() + 2.0 / z;
    let f = |w: f64| 2.0 * w.ln() + 2.0 / w - level;
    let (mut lo, mut hi) = (1.0, 1.0);
    if z < 1.0 {
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
    } else {
        while f(lo) < 0.0 {
            lo *= 0.5;
        }
    }
    let mut conv = RelativeWidth;
    roots::find_root_brent(lo, hi, f, &mut conv).map_err(|e| Error::RootFinding(format!("{e:?}")))
}

struct RelativeWidth;

impl roots::Convergency<f64> for RelativeWidth {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, a: f64, b: f64) -> bool {
        (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= 500
    }
}

/// Spacing that keeps the finite-difference residual of the orbit through
/// `(z, 0)` near its value for `|θ'| = 2`; it shrinks like `θ'_max⁻²`.
pub fn default_spacing(z: f64) -> Result<f64> {
    let z_min = if z < 1.0 { z } else { partner_height(z)? };
    let turn = 2.0 * (1.0 - z_min) / z_min;
    Ok(BASE_SPACING * (2.0 / turn).powi(2).min(1.0))
}

/// Integrates from `(x, z, θ) = (0, z0, 0)` over `span`, sampled every [`default_spacing`].
pub fn solve_grim(z0: f64, span: (f64, f64), config: &SolverConfig) -> Result<GrimOrbit> {
    check_height(z0)?;
    solve_grim_from(PhasePoint::new(z0, 0.0), span, default_spacing(z0)?, config)
}

/// Like [`solve_grim`] with an explicit sample spacing.
pub fn solve_grim_sampled(z0: f64, span: (f64, f64), spacing: f64, config: &SolverConfig) -> Result<GrimOrbit> {
    solve_grim_from(PhasePoint::new(z0, 0.0), span, spacing, config)
}

/// Integrates the grim-reaper system from `(0, start.z, start.theta)` at `s = 0`
/// forward to `span.1` and backward to `span.0`.
pub fn solve_grim_from(start: PhasePoint, span: (f64, f64), spacing: f64, config: &SolverConfig) -> Result<GrimOrbit> {
    check_height(start.z)?;
    if !start.theta.is_finite() {
        return domain("initial angle must be finite");
    }
    validate_span(span, spacing)?;
    config.validate()?;
    let c = first_integral(start)?;
    let grid = uniform_grid(span.0, span.1, spacing);

    let closed_form = |classification, f: &dyn Fn(f64) -> CurveSample| GrimOrbit {
        samples: grid.iter().map(|&s| f(s)).collect(),
        start,
        z0: None,
        z0_star: None,
        period_x: None,
        periods: Vec::new(),
        first_integral_c: c,
        first_integral_drift: 0.0,
        classification,
        events: Vec::new(),
        status: Status::Completed,
    };
    if start.z == 1.0 && start.theta == 0.0 {
        return Ok(closed_form(GrimClassification::HorosphereH1, &|s| CurveSample {
            t: s,
            x: s,
            z: 1.0,
            theta: 0.0,
        }));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    if (start.theta.abs() - half_pi).abs() <= f64::EPSILON * 4.0 {
        let sign = start.theta.signum();
        let mut orbit = closed_form(GrimClassification::VerticalPlane, &|s| CurveSample {
            t: s,
            x: 0.0,
            z: start.z * (sign * s).exp(),
            theta: sign * half_pi,
        });
        orbit.first_integral_c = 0.0;
        return Ok(orbit);
    }

    let field = grim_system();
    let y0 = [0.0, start.z, start.theta];
    let mut samples: Vec<CurveSample> = Vec::with_capacity(grid.len());
    let mut events: Vec<Event> = Vec::new();
    let mut status = Status::Completed;
    let to_sample = |s: f64, y: &[f64]| CurveSample {
        t: s,
        x: y[0],
        z: y[1],
        theta: y[2],
    };

    if span.0 < 0.0 {
        let sol = Integrator::new(&field, *config)
            .events(grim_events())
            .stops(grid.iter().copied().filter(|&s| s < 0.0).collect())
            .grid_only()
            .run(&y0, (0.0, span.0))?;
        let mut back: Vec<CurveSample> = sol
            .trajectory
            .grid_points()
            .skip(1)
            .map(|(s, y)| to_sample(s, y))
            .collect();
        back.reverse();
        samples.extend(back);
        events.extend(sol.events.into_iter().rev());
        status = sol.status;
    }
    samples.push(to_sample(0.0, &y0));
    if span.1 > 0.0 {
        let sol = Integrator::new(&field, *config)
            .events(grim_events())
            .stops(grid.iter().copied().filter(|&s| s > 0.0).collect())
            .grid_only()
            .run(&y0, (0.0, span.1))?;
        samples.extend(sol.trajectory.grid_points().skip(1).map(|(s, y)| to_sample(s, y)));
        events.extend(sol.events);
        if status == Status::Completed {
            status = sol.status;
        }
    }

    let drift = samples
        .iter()
        .map(|p| {
            first_integral(PhasePoint::new(p.z, p.theta))
                .map(|v| (v - c).abs())
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);

    // Minima and maxima at θ = 0, including the start when it is one.
    let mut minima: Vec<(f64, f64, f64)> = Vec::new();
    let mut maxima: Vec<(f64, f64, f64)> = Vec::new();
    for e in &events {
        match e.kind {
            EventKind::ZExtremumMin => minima.push((e.s, e.state[0], e.state[1])),
            EventKind::ZExtremumMax => maxima.push((e.s, e.state[0], e.state[1])),
            _ => {}
        }
    }
    if start.theta == 0.0 {
        let at_start = (0.0, 0.0, start.z);
        if start.z < 1.0 {
            minima.push(at_start);
        } else {
            maxima.push(at_start);
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    maxima.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first_after = |list: &[(f64, f64, f64)]| list.iter().find(|m| m.0 >= 0.0).map(|m| m.2);
    let z0 = if start.theta == 0.0 && start.z < 1.0 {
        Some(start.z)
    } else {
        first_after(&minima)
    };
    let z0_star = if start.theta == 0.0 && start.z > 1.0 {
        Some(start.z)
    } else {
        first_after(&maxima)
    };
    let periods: Vec<f64> = minima.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let period_x = minima
        .windows(2)
        .find(|w| w[0].0 >= 0.0)
        .or_else(|| minima.windows(2).next())
        .map(|w| w[1].1 - w[0].1);

    Ok(GrimOrbit {
        samples,
        start,
        z0,
        z0_star,
        period_x,
        periods,
        first_integral_c: c,
        first_integral_drift: drift,
        classification: GrimClassification::PeriodicGraph,
        events,
        status,
    })
}

/// First event of `kind` after leaving `(0, z, 0)`, searching over growing spans.
fn next_extremum(z: f64, kind: EventKind, config: &SolverConfig) -> Result<Event> {
    check_height(z)?;
    config.validate()?;
    let field = grim_system();
    let mut span = 20.0;
    while span <= 1e5 {
        let sol = Integrator::new(&field, *config)
            .event(EventSpec::z_extremum(1).terminal_on(kind))
            .grid_only()
            .run(&[0.0, z, 0.0], (0.0, span))?;
        match sol.status {
            Status::Terminated => return Ok(sol.events.into_iter().last().expect("terminal event recorded")),
            Status::Completed => span *= 4.0,
            other => {
                return Err(Error::Precondition(format!(
                    "integration from z = {z} ended with {other:?} before reaching a z-extremum"
                )))
            }
        }
    }
    Err(Error::Precondition(format!("no z-extremum found from z = {z}")))
}

/// The unique `z0* > 1` at which the orbit through `(z0, 0)` crosses `θ = 0` again.
pub fn z0_star_map(z0: f64, config: &SolverConfig) -> Result<f64> {
    if !(z0 > 0.0 && z0 < 1.0) {
        return domain(format!("z0 must lie in (0, 1), got {z0}"));
    }
    Ok(next_extremum(z0, EventKind::ZExtremumMax, config)?.state[1])
}

/// Inverse of [`z0_star_map`]: the next minimum height after starting at the maximum `z0_star`.
pub fn z0_from_star(z0_star: f64, config: &SolverConfig) -> Result<f64> {
    if !(z0_star > 1.0) || !z0_star.is_finite() {
        return domain(format!("z0* must exceed 1, got {z0_star}"));
    }
    Ok(next_extremum(z0_star, EventKind::ZExtremumMin, config)?.state[1])
}

/// One full period of the orbit through the minimum `(z0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrimPeriod {
    pub z0: f64,
    pub z0_star: f64,
    /// Advance in `x` between consecutive minima.
    pub period_x: f64,
    /// Hyperbolic arc length of one period.
    pub period_s: f64,
    /// `|z - z0|` at the next minimum.
    pub closure_error: f64,
}

pub fn grim_period(z0: f64, config: &SolverConfig) -> Result<GrimPeriod> {
    if !(z0 > 0.0 && z0 < 1.0) {
        return domain(format!("z0 must lie in (0, 1), got {z0}"));
    }
    config.validate()?;
    let field = grim_system();
    let mut span = 40.0;
    while span <= 1e5 {
        let sol = Integrator::new(&field, *config)
            .event(EventSpec::z_extremum(1).terminal_on(EventKind::ZExtremumMin))
            .grid_only()
            .run(&[0.0, z0, 0.0], (0.0, span))?;
        if sol.status == Status::Terminated {
            let max = sol
                .events
                .iter()
                .find(|e| e.kind == EventKind::ZExtremumMax)
                .ok_or_else(|| Error::Precondition("period ended without a maximum".into()))?;
            let min = sol.events.last().expect("terminal event recorded");
            return Ok(GrimPeriod {
                z0,
                z0_star: max.state[1],
                period_x: min.state[0],
                period_s: min.s,
                closure_error: (min.state[1] - z0).abs(),
            });
        }
        if sol.status != Status::Completed {
            return Err(Error::Precondition(format!(
                "period integration ended with {:?}",
                sol.status
            )));
        }
        span *= 4.0;
    }
    Err(Error::Precondition(format!("no period found for z0 = {z0}")))
}

/// Symmetry statistics for an orbit sampled on a span symmetric about `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `max |z(-s) - z(s)|`.
    pub z_asymmetry: f64,
    /// `max |θ(-s) + θ(s)|`.
    pub theta_asymmetry: f64,
    /// `max |x(-s) + x(s)|`.
    pub x_asymmetry: f64,
    /// `max` over samples of the mismatch between `f(z, π - θ)` and `(z', -θ')`.
    pub reflected_field_error: f64,
    pub pairs: usize,
}

impl SymmetryReport {
    pub fn max_asymmetry(&self) -> f64 {
        self.z_asymmetry.max(self.theta_asymmetry).max(self.x_asymmetry)
    }
}

/// Compares the two halves of an orbit started at `θ = 0` and integrated over `[-S, S]`.
pub fn symmetry_check(orbit: &GrimOrbit) -> Result<SymmetryReport> {
    if orbit.start.theta != 0.0 {
        return Err(Error::Precondition("orbit must start at θ = 0".into()));
    }
    let n = orbit.samples.len();
    let centre = orbit
        .samples
        .iter()
        .position(|p| p.t == 0.0)
        .ok_or_else(|| Error::Precondition("orbit has no sample at s = 0".into()))?;
    let pairs = centre.min(n - 1 - centre);
    if pairs == 0 {
        return Err(Error::Precondition("orbit must extend to both sides of s = 0".into()));
    }
    let mut report = SymmetryReport {
        z_asymmetry: 0.0,
        theta_asymmetry: 0.0,
        x_asymmetry: 0.0,
        reflected_field_error: 0.0,
        pairs,
    };
    for k in 1..=pairs {
        let (a, b) = (&orbit.samples[centre - k], &orbit.samples[centre + k]);
        if (a.t + b.t).abs() > 1e-9 * (1.0 + b.t.abs()) {
            return Err(Error::Precondition(format!(
                "samples at {} and {} are not mirror images",
                a.t, b.t
            )));
        }
        report.z_asymmetry = report.z_asymmetry.max((a.z - b.z).abs());
        report.theta_asymmetry = report.theta_asymmetry.max((a.theta + b.theta).abs());
        report.x_asymmetry = report.x_asymmetry.max((a.x + b.x).abs());
    }
    for p in &orbit.samples {
        let (dz, dt) = grim_field(PhasePoint::new(p.z, p.theta))?;
        let (rz, rt) = grim_field(PhasePoint::new(p.z, std::f64::consts::PI - p.theta))?;
        let err = (rz - dz).abs().max((rt + dt).abs());
        report.reflected_field_error = report.reflected_field_error.max(err);
    }
    Ok(report)
}
