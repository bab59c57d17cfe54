use serde::{Deserialize, Serialize};

use super::picard::{picard_iterate, PicardSetup};
use super::{axis_curvature, height_potential};
use crate::error::{domain, Error, Result};
use crate::geometry::{CurveFamily, CurveSample, GeneratingCurve};
use crate::ode::{field_fn, Event, EventKind, EventSpec, Integrator, OutOfDomain, SolverConfig, Status};

pub const DEFAULT_R_SWITCH: f64 = 1e-3;
pub const SLOPE_CAP_DEGREES: f64 = 75.0;

/// Truncation of the axis expansion used to leave `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesOrder {
    /// `z0 + a r² / 2`, see [`bowl_series_start`].
    Quadratic,
    /// Adds the `r⁴` term, see [`bowl_series_start_fourth_order`].
    Quartic,
}

/// How a bowl is started and sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowlOptions {
    pub r_switch: f64,
    pub series: SeriesOrder,
    /// Uniform sample spacing in `r`; `None` keeps the solver's own steps
    /// and `Some(0.0)` picks [`default_bowl_spacing`].
    pub spacing: Option<f64>,
    pub slope_cap_degrees: f64,
    /// Run the Picard iteration and compare it with the series start.
    pub cross_validate: bool,
}

impl Default for BowlOptions {
    fn default() -> Self {
        Self {
            r_switch: DEFAULT_R_SWITCH,
            series: SeriesOrder::Quartic,
            spacing: Some(0.0),
            slope_cap_degrees: SLOPE_CAP_DEGREES,
            cross_validate: true,
        }
    }
}

/// One sample of a bowl profile. `energy_integral` is `∫₀^r z'(t)²/t dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowlSample {
    pub r: f64,
    pub z: f64,
    pub dz: f64,
    pub energy_integral: f64,
}

/// Series and Picard starts compared at the switch radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarterComparison {
    pub r_switch: f64,
    pub series_z: f64,
    pub series_dz: f64,
    pub picard_z: f64,
    pub picard_dz: f64,
    pub z_difference: f64,
    pub dz_difference: f64,
    pub picard_setup: PicardSetup,
    pub picard_iterations: usize,
    pub picard_deltas: Vec<f64>,
    /// `z''(0)` measured on the Picard fixed point.
    pub axis_second_derivative: f64,
}

impl StarterComparison {
    pub fn compute(z0: f64, r_switch: f64) -> Result<Self> {
        let setup = PicardSetup::new(z0)?;
        let res = picard_iterate(&setup)?;
        let r = r_switch.min(setup.r);
        let (picard_z, picard_dz) = res.eval(r)?;
        let (series_z, series_dz) = bowl_series_start(z0, r)?;
        Ok(Self {
            r_switch: r,
            series_z,
            series_dz,
            picard_z,
            picard_dz,
            z_difference: (series_z - picard_z).abs(),
            dz_difference: (series_dz - picard_dz).abs(),
            picard_setup: setup,
            picard_iterations: res.iterations,
            axis_second_derivative: res.axis_second_derivative(),
            picard_deltas: res.deltas,
        })
    }
}

/// A bowl profile `z = z(r)` meeting the axis orthogonally at height `z0`.
#[derive(Debug, Clone)]
pub struct BowlCurve {
    pub z0: f64,
    pub r_switch: f64,
    pub samples: Vec<BowlSample>,
    /// Interior z-extrema (maxima and minima) in increasing `r`.
    pub extrema: Vec<Event>,
    /// Crossings of the horosphere `z = 1`.
    pub z_one_crossings: Vec<f64>,
    pub energy_residual: f64,
    pub status: Status,
    pub starter: Option<StarterComparison>,
    /// Radius where the slope cap forced the arc-length system, if it ever did.
    pub switched_to_arc_length_at: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl BowlCurve {
    pub fn curve(&self) -> GeneratingCurve {
        GeneratingCurve::new(
            CurveFamily::Bowl,
            self.samples
                .iter()
                .map(|p| CurveSample {
                    t: p.r,
                    x: p.r,
                    z: p.z,
                    theta: p.dz.atan(),
                })
                .collect(),
        )
    }

    pub fn maxima(&self) -> impl Iterator<Item = &Event> {
        self.extrema.iter().filter(|e| e.kind == EventKind::ZExtremumMax)
    }

    pub fn minima(&self) -> impl Iterator<Item = &Event> {
        self.extrema.iter().filter(|e| e.kind == EventKind::ZExtremumMin)
    }
}

/// Sample spacing that keeps the finite-difference residual near the axis
/// comparable across `z0`; it shrinks with the axis curvature.
pub fn default_bowl_spacing(z0: f64) -> Result<f64> {
    let a = axis_curvature(z0)?;
    Ok(0.002 * (2.0 / a.abs()).min(1.0))
}

/// `(z, z')` at `r` from `z ≈ z0 + z''(0) r² / 2`.
pub fn bowl_series_start(z0: f64, r_switch: f64) -> Result<(f64, f64)> {
    let a = axis_curvature(z0)?;
    if !(r_switch >= 0.0) {
        return domain(format!("switch radius must be non-negative, got {r_switch}"));
    }
    Ok((z0 + 0.5 * a * r_switch * r_switch, a * r_switch))
}

/// `(z, z')` at `r` including the quartic term of the axis expansion.
pub fn bowl_series_start_fourth_order(z0: f64, r: f64) -> Result<(f64, f64)> {
    let (a, b) = axis_coefficients(z0)?;
    let r2 = r * r;
    Ok((z0 + a * r2 / 2.0 + b * r2 * r2 / 4.0, a * r + b * r2 * r))
}

// z'(r) = a r + b r³ + O(r⁵).
fn axis_coefficients(z0: f64) -> Result<(f64, f64)> {
    let a = axis_curvature(z0)?;
    let dg = (2.0 * z0 - 4.0) / (z0 * z0 * z0);
    Ok((a, (a * a * a + 0.5 * dg * a) / 4.0))
}

/// Largest violation of
/// `½ log(1 + z'²) + ∫₀^r z'²/t dt = -2 (1/z + log z) + 2 (1/z0 + log z0)`.
pub fn energy_identity_residual(curve: &BowlCurve) -> Result<f64> {
    energy_residual(curve.z0, &curve.samples)
}

pub(crate) fn energy_residual(z0: f64, samples: &[BowlSample]) -> Result<f64> {
    let base = height_potential(z0);
    let mut max = 0.0_f64;
    for p in samples {
        if !p.energy_integral.is_finite() {
            return Err(Error::Precondition(format!(
                "sample at r = {} has no energy accumulator",
                p.r
            )));
        }
        let lhs = 0.5 * (1.0 + p.dz * p.dz).ln() + p.energy_integral;
        let rhs = height_potential(p.z) - base;
        max = max.max((lhs - rhs).abs());
    }
    Ok(max)
}

/// [`solve_bowl_with`] using [`BowlOptions::default`].
pub fn solve_bowl(z0: f64, r_max: f64, config: &SolverConfig) -> Result<BowlCurve> {
    solve_bowl_with(z0, r_max, &BowlOptions::default(), config)
}

pub fn solve_bowl_with(z0: f64, r_max: f64, options: &BowlOptions, config: &SolverConfig) -> Result<BowlCurve> {
    if !(z0 > 0.0) || !z0.is_finite() {
        return domain(format!("axis height must be positive, got {z0}"));
    }
    if !(r_max > options.r_switch) || !r_max.is_finite() {
        return Err(Error::Precondition(format!(
            "r_max must exceed the switch radius {}, got {r_max}",
            options.r_switch
        )));
    }
    if !(options.r_switch > 0.0) {
        return Err(Error::Precondition("switch radius must be positive".into()));
    }
    let spacing = match options.spacing {
        Some(h) if h == 0.0 => Some(default_bowl_spacing(z0)?),
        Some(h) if !(h > 0.0) => {
            return Err(Error::Precondition(format!("sample spacing must be positive, got {h}")));
        }
        other => other,
    };
    config.validate()?;

    if z0 == 1.0 {
        let grid = match spacing {
            Some(h) => crate::grim::uniform_grid(0.0, r_max, h),
            None => vec![0.0, r_max],
        };
        return Ok(BowlCurve {
            z0,
            r_switch: options.r_switch,
            samples: grid
                .into_iter()
                .map(|r| BowlSample {
                    r,
                    z: 1.0,
                    dz: 0.0,
                    energy_integral: 0.0,
                })
                .collect(),
            extrema: Vec::new(),
            z_one_crossings: Vec::new(),
            energy_residual: 0.0,
            status: Status::Completed,
            starter: None,
            switched_to_arc_length_at: None,
            diagnostics: Vec::new(),
        });
    }

    let mut diagnostics = Vec::new();
    let mut r_switch = options.r_switch;
    let setup = PicardSetup::new(z0)?;
    if setup.r < r_switch {
        diagnostics.push(format!(
            "switch radius {r_switch} exceeds the contraction radius {}; using the latter",
            setup.r
        ));
        r_switch = setup.r;
    }
    let starter = if options.cross_validate {
        Some(StarterComparison::compute(z0, r_switch)?)
    } else {
        None
    };

    let (a, b) = axis_coefficients(z0)?;
    let r2 = r_switch * r_switch;
    // ∫₀^r z'²/t dt for the truncated z'.
    let (zs, dzs, acc0) = match options.series {
        SeriesOrder::Quadratic => {
            let (z, p) = bowl_series_start(z0, r_switch)?;
            (z, p, 0.5 * a * a * r2)
        }
        SeriesOrder::Quartic => {
            let (z, p) = bowl_series_start_fourth_order(z0, r_switch)?;
            (
                z,
                p,
                0.5 * a * a * r2 + 0.5 * a * b * r2 * r2 + b * b * r2 * r2 * r2 / 6.0,
            )
        }
    };

    let field = field_fn(2, |r, y, dy| {
        let (z, p) = (y[0], y[1]);
        if !(z > 0.0) {
            return Err(OutOfDomain(format!("z = {z}")));
        }
        dy[0] = p;
        dy[1] = (1.0 + p * p) * (2.0 * (1.0 - z) / (z * z) - p / r);
        Ok(())
    });
    let cap = options.slope_cap_degrees.to_radians().tan();
    let events = vec![
        EventSpec::z_extremum(0),
        EventSpec::level(EventKind::ZOne, 0, 1.0),
        EventSpec::custom(EventKind::User, move |_, y, _| y[1].abs() - cap).terminal(),
    ];
    let mut integrator = Integrator::new(&field, *config)
        .events(events)
        .quadrature(|r, y| y[1] * y[1] / r);
    if let Some(h) = spacing {
        let stops: Vec<f64> = crate::grim::uniform_grid(0.0, r_max, h)
            .into_iter()
            .filter(|&r| r > r_switch)
            .collect();
        integrator = integrator.stops(stops).grid_only();
    }
    let sol = integrator.run(&[zs, dzs, acc0], (r_switch, r_max))?;

    let mut samples = vec![BowlSample {
        r: 0.0,
        z: z0,
        dz: 0.0,
        energy_integral: 0.0,
    }];
    let keep: Box<dyn Iterator<Item = (f64, &[f64])>> = if spacing.is_some() {
        Box::new(sol.trajectory.grid_points().skip(1))
    } else {
        Box::new(
            sol.trajectory
                .s
                .iter()
                .copied()
                .zip(sol.trajectory.y.iter().map(|v| v.as_slice())),
        )
    };
    samples.extend(keep.map(|(r, y)| BowlSample {
        r,
        z: y[0],
        dz: y[1],
        energy_integral: y[2],
    }));

    let mut extrema: Vec<Event> = Vec::new();
    let mut z_one_crossings = Vec::new();
    let mut switched = None;
    for e in &sol.events {
        match e.kind {
            EventKind::ZExtremumMax | EventKind::ZExtremumMin => extrema.push(e.clone()),
            EventKind::ZOne => z_one_crossings.push(e.s),
            EventKind::User => switched = Some(e.s),
            _ => {}
        }
    }
    let mut status = sol.status;
    if let Some(r0) = switched {
        diagnostics.push(format!("slope reached the cap at r = {r0}; continuing in arc length"));
        let y = sol.final_state();
        let (s_z, s_p, s_acc) = (y[0], y[1], y[2]);
        let tail = continue_in_arc_length(r0, s_z, s_p.atan(), s_acc, r_max, config)?;
        samples.extend(tail.0);
        extrema.extend(tail.1);
        status = tail.2;
    }

    let energy = energy_residual(z0, &samples)?;
    Ok(BowlCurve {
        z0,
        r_switch,
        samples,
        extrema,
        z_one_crossings,
        energy_residual: energy,
        status,
        starter,
        switched_to_arc_length_at: switched,
        diagnostics,
    })
}

// Arc-length continuation once the graph form is too steep; the radius must keep increasing.
fn continue_in_arc_length(
    r0: f64,
    z0: f64,
    theta0: f64,
    acc0: f64,
    r_max: f64,
    config: &SolverConfig,
) -> Result<(Vec<BowlSample>, Vec<Event>, Status)> {
    let field = field_fn(3, |_, y, dy| {
        let (x, z, t) = (y[0], y[1], y[2]);
        if !(x > 0.0 && z > 0.0) {
            return Err(OutOfDomain(format!("x = {x}, z = {z}")));
        }
        let (sin, cos) = t.sin_cos();
        dy[0] = cos;
        dy[1] = sin;
        dy[2] = -sin / x + 2.0 * cos * (1.0 - z) / (z * z);
        Ok(())
    });
    let sol = Integrator::new(&field, *config)
        .events(vec![
            EventSpec::level(EventKind::User, 0, r_max).terminal(),
            EventSpec::z_extremum(1),
            EventSpec::custom(EventKind::XCritical, |_, y, _| {
                (std::f64::consts::FRAC_PI_2 - y[2]).sin()
            })
            .terminal(),
        ])
        .quadrature(|_, y| {
            let (sin, cos) = y[2].sin_cos();
            sin * sin / (cos * y[0])
        })
        .run(&[r0, z0, theta0, acc0], (0.0, 10.0 * r_max))?;
    let samples = sol
        .trajectory
        .y
        .iter()
        .skip(1)
        .map(|y| BowlSample {
            r: y[0],
            z: y[1],
            dz: y[2].tan(),
            energy_integral: y[3],
        })
        .collect();
    let mut status = sol.status;
    let mut extrema = Vec::new();
    for e in sol.events {
        match e.kind {
            EventKind::ZExtremumMax | EventKind::ZExtremumMin => {
                // Report extrema by radius, like the graph form.
                extrema.push(Event { s: e.state[0], ..e });
            }
            EventKind::XCritical => {
                return Err(Error::Precondition(format!(
                    "bowl profile turned back towards the axis at r = {}",
                    e.state[0]
                )))
            }
            EventKind::User => status = Status::Completed,
            _ => {}
        }
    }
    Ok((samples, extrema, status))
}
