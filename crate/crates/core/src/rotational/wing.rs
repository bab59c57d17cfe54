use crate::error::{domain, Error, Result};
use crate::geometry::{CurveFamily, CurveSample, GeneratingCurve};
use crate::ode::{field_fn, Event, EventKind, EventSpec, Integrator, OutOfDomain, SolverConfig, Status, VectorField};

/// Sample spacing in arc length used by [`solve_wing`].
pub const DEFAULT_WING_SPACING: f64 = 0.001;
const WAIST_STEP: f64 = 1e-3;

/// A wing profile through the waist `(x0, z0)`, where the tangent is vertical.
#[derive(Debug, Clone)]
pub struct WingCurve {
    pub x0: f64,
    pub z0: f64,
    /// Uniform in arc length over `[-s_max, s_max]`; `s = 0` is the waist.
    pub samples: Vec<CurveSample>,
    /// Index of the waist sample.
    pub branch_split: usize,
    /// z-extrema for `s > 0` (upper branch), increasing `s`.
    pub upper_extrema: Vec<Event>,
    /// z-extrema for `s < 0` (lower branch), increasing `|s|`.
    pub lower_extrema: Vec<Event>,
    /// Arc-length locations where `x' = 0`, the waist included.
    pub x_critical_points: Vec<f64>,
    /// Central-difference `x''(0)`.
    pub waist_second_derivative: f64,
    pub min_x: f64,
    pub min_x_at: f64,
    pub status_upper: Status,
    pub status_lower: Status,
}

impl WingCurve {
    pub fn curve(&self) -> GeneratingCurve {
        GeneratingCurve::new(CurveFamily::Wing, self.samples.clone())
    }

    pub fn upper_branch(&self) -> &[CurveSample] {
        &self.samples[self.branch_split..]
    }

    pub fn lower_branch(&self) -> &[CurveSample] {
        &self.samples[..=self.branch_split]
    }
}

fn arc_length_system() -> impl VectorField {
    field_fn(3, |_, y, dy| {
        let (x, z) = (y[0], y[1]);
        if !(x > 0.0 && z > 0.0) {
            return Err(OutOfDomain(format!("x = {x}, z = {z}")));
        }
        let (sin, cos) = y[2].sin_cos();
        dy[0] = cos;
        dy[1] = sin;
        dy[2] = -sin / x + 2.0 * cos * (1.0 - z) / (z * z);
        Ok(())
    })
}

fn wing_events() -> Vec<EventSpec<'static>> {
    vec![
        EventSpec::z_extremum(1),
        // cos θ written so that it vanishes exactly at θ = π/2.
        EventSpec::custom(EventKind::XCritical, |_, y, _| {
            (std::f64::consts::FRAC_PI_2 - y[2]).sin()
        }),
        EventSpec::level(EventKind::ZOne, 1, 1.0),
    ]
}

/// [`solve_wing_sampled`] with the default spacing.
pub fn solve_wing(x0: f64, z0: f64, s_max: f64, config: &SolverConfig) -> Result<WingCurve> {
    solve_wing_sampled(x0, z0, s_max, DEFAULT_WING_SPACING, config)
}

/// Integrates the arc-length system from `(x0, z0, π/2)` forward and backward to `±s_max`.
pub fn solve_wing_sampled(x0: f64, z0: f64, s_max: f64, spacing: f64, config: &SolverConfig) -> Result<WingCurve> {
    if !(x0 > 0.0) || !(z0 > 0.0) || !x0.is_finite() || !z0.is_finite() {
        return domain(format!("waist must satisfy x0 > 0 and z0 > 0, got ({x0}, {z0})"));
    }
    if !(s_max > 0.0) || !s_max.is_finite() || !(spacing > 0.0) {
        return Err(Error::Precondition("s_max and spacing must be positive".into()));
    }
    config.validate()?;
    let field = arc_length_system();
    let y0 = [x0, z0, std::f64::consts::FRAC_PI_2];
    let grid = crate::grim::uniform_grid(-s_max, s_max, spacing);
    let sample = |s: f64, y: &[f64]| CurveSample {
        t: s,
        x: y[0],
        z: y[1],
        theta: y[2],
    };

    let back = Integrator::new(&field, *config)
        .events(wing_events())
        .stops(grid.iter().copied().filter(|&s| s < 0.0).collect())
        .grid_only()
        .run(&y0, (0.0, -s_max))?;
    let fwd = Integrator::new(&field, *config)
        .events(wing_events())
        .stops(grid.iter().copied().filter(|&s| s > 0.0).collect())
        .grid_only()
        .run(&y0, (0.0, s_max))?;

    let mut samples: Vec<CurveSample> = back
        .trajectory
        .grid_points()
        .skip(1)
        .map(|(s, y)| sample(s, y))
        .collect();
    samples.reverse();
    let branch_split = samples.len();
    samples.push(sample(0.0, &y0));
    samples.extend(fwd.trajectory.grid_points().skip(1).map(|(s, y)| sample(s, y)));

    let is_extremum = |e: &&Event| matches!(e.kind, EventKind::ZExtremumMax | EventKind::ZExtremumMin);
    let upper_extrema: Vec<Event> = fwd.events.iter().filter(is_extremum).cloned().collect();
    let lower_extrema: Vec<Event> = back.events.iter().filter(is_extremum).cloned().collect();
    let mut x_critical_points: Vec<f64> = back
        .events
        .iter()
        .chain(&fwd.events)
        .filter(|e| e.kind == EventKind::XCritical)
        .map(|e| e.s)
        .collect();
    x_critical_points.push(0.0);
    x_critical_points.sort_by(f64::total_cmp);

    let (mut min_x, mut min_x_at) = (f64::INFINITY, 0.0);
    for p in &samples {
        if p.x < min_x {
            min_x = p.x;
            min_x_at = p.t;
        }
    }

    Ok(WingCurve {
        x0,
        z0,
        samples,
        branch_split,
        upper_extrema,
        lower_extrema,
        x_critical_points,
        waist_second_derivative: waist_second_derivative(x0, z0)?,
        min_x,
        min_x_at,
        status_upper: fwd.status,
        status_lower: back.status,
    })
}

fn waist_second_derivative(x0: f64, z0: f64) -> Result<f64> {
    let field = arc_length_system();
    let cfg = SolverConfig {
        rtol: 1e-13,
        atol: 1e-15,
        ..SolverConfig::default()
    };
    let y0 = [x0, z0, std::f64::consts::FRAC_PI_2];
    let plus = Integrator::new(&field, cfg).run(&y0, (0.0, WAIST_STEP))?;
    let minus = Integrator::new(&field, cfg).run(&y0, (0.0, -WAIST_STEP))?;
    Ok((plus.final_state()[0] - 2.0 * x0 + minus.final_state()[0]) / (WAIST_STEP * WAIST_STEP))
}

/// `x''` for a profile written as a graph `x = x(r)` over the height `r`:
/// `x'' = (r² + 2 (r - 1) x x') (1 + x'²) / (r² x)`.
pub fn rot3_field(r: f64, x: f64, dx: f64) -> Result<f64> {
    if !(r > 0.0) || !(x > 0.0) {
        return domain(format!("need height r > 0 and x > 0, got r = {r}, x = {x}"));
    }
    Ok((r * r + 2.0 * (r - 1.0) * x * dx) * (1.0 + dx * dx) / (r * r * x))
}

/// Largest `|x|` mismatch between the upper branch from the arc-length system
/// and the graph `x = x(z)` solved from the waist, over heights `[z0, z0 + dz]`.
pub fn wing_graph_crosscheck(x0: f64, z0: f64, dz: f64, config: &SolverConfig) -> Result<f64> {
    if !(dz > 0.0) {
        return Err(Error::Precondition("height range must be positive".into()));
    }
    let wing = solve_wing_sampled(x0, z0, 4.0 * dz + 1.0, 0.01, config)?;
    let upper: Vec<&CurveSample> = wing.upper_branch()[1..]
        .iter()
        .take_while(|p| p.z <= z0 + dz && p.theta > 0.0)
        .collect();
    if upper.len() < 2 || upper.last().map_or(true, |p| p.z < z0 + 0.5 * dz) {
        return Err(Error::Precondition(
            "upper branch turns before reaching the requested height".into(),
        ));
    }
    let graph = field_fn(2, |r, y, d| {
        if !(r > 0.0 && y[0] > 0.0) {
            return Err(OutOfDomain(format!("r = {r}, x = {}", y[0])));
        }
        d[0] = y[1];
        d[1] = (r * r + 2.0 * (r - 1.0) * y[0] * y[1]) * (1.0 + y[1] * y[1]) / (r * r * y[0]);
        Ok(())
    });
    let heights: Vec<f64> = upper.iter().map(|p| p.z).collect();
    let end = *heights.last().unwrap();
    let sol = Integrator::new(&graph, *config)
        .stops(heights.clone())
        .grid_only()
        .run(&[x0, 0.0], (z0, end))?;
    let xs: Vec<f64> = sol.trajectory.grid_points().skip(1).map(|(_, y)| y[0]).collect();
    if xs.len() != upper.len() {
        return Err(Error::Precondition(
            "graph integration did not reach every height".into(),
        ));
    }
    Ok(upper.iter().zip(&xs).map(|(p, x)| (p.x - x).abs()).fold(0.0, f64::max))
}
