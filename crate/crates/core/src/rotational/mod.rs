//! Rotational horo-shrinkers about the `z`-axis.
//!
//! A profile curve `(x(s), z(s))` in Euclidean arc length with tangent angle `θ`
//! generates a horo-shrinker when
//!
//! ```text
//! x' = cos θ,   z' = sin θ,   θ' = -sin θ / x + 2 cos θ (1 - z) / z².
//! ```
//!
//! Curves meeting the axis (bowls) are graphs `z = z(r)` with `z'(0) = 0` and
//! solve `z'' = (1 + z'²) (2 (1 - z) / z² - z' / r)`, singular at `r = 0`.
//! Curves that never meet the axis (wings) have a waist where `θ = π/2`.

pub(crate) mod bowl;
mod picard;
mod wing;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use bowl::{
    bowl_series_start, bowl_series_start_fourth_order, default_bowl_spacing, energy_identity_residual, solve_bowl,
    solve_bowl_with, BowlCurve, BowlOptions, BowlSample, SeriesOrder, StarterComparison, DEFAULT_R_SWITCH,
    SLOPE_CAP_DEGREES,
};
pub use picard::{picard_iterate, PicardResult, PicardSetup};
pub use wing::{rot3_field, solve_wing, solve_wing_sampled, wing_graph_crosscheck, WingCurve, DEFAULT_WING_SPACING};

/// Profile state in Euclidean arc length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotState {
    pub x: f64,
    pub z: f64,
    pub theta: f64,
}

impl RotState {
    pub fn new(x: f64, z: f64, theta: f64) -> Self {
        Self { x, z, theta }
    }
}

/// `(x', z', θ')` of the arc-length system.
pub fn rot_field(state: RotState) -> Result<(f64, f64, f64)> {
    let RotState { x, z, theta } = state;
    if !(x > 0.0) {
        return domain(format!("distance to the axis must be positive, got x = {x}"));
    }
    if !(z > 0.0) {
        return domain(format!("height must be positive, got z = {z}"));
    }
    let (sin, cos) = theta.sin_cos();
    Ok((cos, sin, -sin / x + 2.0 * cos * (1.0 - z) / (z * z)))
}

/// `z''` of a bowl profile written as a graph over the radius, for `r > 0`.
pub fn graph_second_derivative(r: f64, z: f64, dz: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    if !(z > 0.0) {
        return domain(format!("height must be positive, got z = {z}"));
    }
    Ok((1.0 + dz * dz) * (2.0 * (1.0 - z) / (z * z) - dz / r))
}

/// `-2 (1/z + log z)`, the height term of the energy identity.
pub fn height_potential(z: f64) -> f64 {
    -2.0 * (1.0 / z + z.ln())
}

/// `z''(0) = (1 - z0) / z0²` for the bowl through `(0, z0)`.
pub fn axis_curvature(z0: f64) -> Result<f64> {
    if !(z0 > 0.0) {
        return domain(format!("axis height must be positive, got {z0}"));
    }
    Ok((1.0 - z0) / (z0 * z0))
}
