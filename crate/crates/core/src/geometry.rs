//! Upper half-space conventions and the horo-shrinker residual oracle.
//!
//! Points are `(x, y, z)` with `z > 0` and metric `<.,.>_e / z^2`. A surface
//! with Euclidean mean curvature `H_e` and Euclidean unit normal `N_e` has
//! hyperbolic mean curvature `H = z H_e + (N_e)_3`, and its hyperbolic unit
//! normal is `N = z N_e`, so `<N, d/dz> = (N_e)_3 / z`. A horo-shrinker is a
//! surface with `H = <N, d/dz>`.
//!
//! [`shrinker_residual`] checks that equation on a sampled generating curve
//! using only finite differences of the sampled positions: curvature, tangent
//! angle and normal are all re-derived from `(x, z)` and never taken from the
//! ODE that produced the curve.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A point of the upper half-space model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfSpacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UpperHalfSpacePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(z > 0.0) || !x.is_finite() || !y.is_finite() || !z.is_finite() {
            return domain(format!(
                "upper half-space point needs finite coordinates and z > 0, got z = {z}"
            ));
        }
        Ok(Self { x, y, z })
    }

    /// Hyperbolic inner product of two tangent vectors at this point.
    pub fn inner(&self, u: [f64; 3], v: [f64; 3]) -> f64 {
        (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (self.z * self.z)
    }
}

/// Euclidean and hyperbolic curvature data of a surface at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: UpperHalfSpacePoint,
    pub euclidean_mean_curvature: f64,
    pub euclidean_normal: [f64; 3],
    pub hyperbolic_mean_curvature: f64,
}

impl CurvatureSample {
    pub fn new(point: UpperHalfSpacePoint, euclidean_mean_curvature: f64, euclidean_normal: [f64; 3]) -> Result<Self> {
        let norm = euclidean_normal.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return domain(format!("Euclidean normal must be a unit vector, |N_e| = {norm}"));
        }
        let hyperbolic_mean_curvature = point.z * euclidean_mean_curvature + euclidean_normal[2];
        Ok(Self {
            point,
            euclidean_mean_curvature,
            euclidean_normal,
            hyperbolic_mean_curvature,
        })
    }

    /// `<N, d/dz>` with `N = z N_e`, evaluated in the hyperbolic metric.
    pub fn normal_dot_dz(&self) -> f64 {
        horo_normal_component(self.point.z, self.euclidean_normal[2])
    }

    /// `H - <N, d/dz>`; zero on a horo-shrinker.
    pub fn residual(&self) -> f64 {
        self.hyperbolic_mean_curvature - self.normal_dot_dz()
    }
}

/// Hyperbolic mean curvature from Euclidean data: `z H_e + (N_e)_3`.
pub fn hyperbolic_from_euclidean(z: f64, euclidean_mean_curvature: f64, normal_z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return domain(format!("height must be positive, got {z}"));
    }
    Ok(z * euclidean_mean_curvature + normal_z)
}

/// `<N, d/dz> = (N_e)_3 / z`.
pub fn horo_normal_component(z: f64, normal_z: f64) -> f64 {
    normal_z / z
}

/// One-parameter isometry group a surface is invariant under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryKind {
    /// Horizontal translations along `(0, 1, 0)`; the curve lives in the `xz`-plane.
    ParabolicCylinder,
    /// Euclidean rotations about the `z`-axis; `x` is the distance to the axis.
    Rotational,
}

/// Which generator produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveFamily {
    Grim,
    Bowl,
    Wing,
}

impl CurveFamily {
    pub fn symmetry(self) -> SymmetryKind {
        match self {
            CurveFamily::Grim => SymmetryKind::ParabolicCylinder,
            CurveFamily::Bowl | CurveFamily::Wing => SymmetryKind::Rotational,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveFamily::Grim => "grim",
            CurveFamily::Bowl => "bowl",
            CurveFamily::Wing => "wing",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "grim" => Some(CurveFamily::Grim),
            "bowl" => Some(CurveFamily::Bowl),
            "wing" => Some(CurveFamily::Wing),
            _ => None,
        }
    }
}

/// One sample of a generating curve. `t` is the curve parameter (arc length
/// or, for graphs, the radius) and `theta` the tangent angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub theta: f64,
}

/// Sampled generating curve with its family.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingCurve {
    pub family: CurveFamily,
    pub samples: Vec<CurveSample>,
}

impl GeneratingCurve {
    pub fn new(family: CurveFamily, samples: Vec<CurveSample>) -> Self {
        Self { family, samples }
    }
}

/// Residual and conservation statistics for a sampled curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub symmetry: SymmetryKind,
    pub samples: usize,
    /// Samples that entered the statistics (endpoints are excluded).
    pub interior_points: usize,
    pub max_residual: f64,
    pub rms_residual: f64,
    /// Parameter value where the largest residual occurs.
    pub max_residual_at: f64,
    /// Largest deviation of the grim-reaper first integral from its initial value.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub first_integral_drift: Option<f64>,
    /// Largest violation of the bowl energy identity.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energy_residual: Option<f64>,
}

// Centered three-point first and second derivative at the middle node of a
// possibly non-uniform grid, written on differences so constants give exact zeros.
fn derivatives(h1: f64, h2: f64, a: f64, b: f64, c: f64) -> (f64, f64) {
    let (fwd, back) = (c - b, b - a);
    let d1 = (h1 * h1 * fwd + h2 * h2 * back) / (h1 * h2 * (h1 + h2));
    let d2 = 2.0 * (fwd / h2 - back / h1) / (h1 + h2);
    (d1, d2)
}

/// Finite-difference residual `H - <N, d/dz>` at every interior sample of `curve`.
///
/// Returns `(t, residual)` pairs.
pub fn residual_profile(curve: &GeneratingCurve, symmetry: SymmetryKind) -> Result<Vec<(f64, f64)>> {
    let s = &curve.samples;
    if s.len() < 5 {
        return Err(Error::TooFewSamples {
            needed: 5,
            got: s.len(),
        });
    }
    if let Some(w) = s.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Precondition(format!(
            "curve parameter must be strictly increasing (samples {w} and {})",
            w + 1
        )));
    }
    let mut out = Vec::with_capacity(s.len() - 2);
    for i in 1..s.len() - 1 {
        let (a, b, c) = (&s[i - 1], &s[i], &s[i + 1]);
        if !(b.z > 0.0) {
            return domain(format!("sample {i} has non-positive height {}", b.z));
        }
        let (h1, h2) = (b.t - a.t, c.t - b.t);
        let (dx, ddx) = derivatives(h1, h2, a.x, b.x, c.x);
        let (dz, ddz) = derivatives(h1, h2, a.z, b.z, c.z);
        let speed = dx.hypot(dz);
        if !(speed > 0.0) {
            return domain(format!("curve is stationary at sample {i}"));
        }
        // Tangent angle from the sampled tangent: (cos, sin) = (x', z') / |.|.
        let (cos_t, sin_t) = (dx / speed, dz / speed);
        let kappa = (dx * ddz - dz * ddx) / speed.powi(3);
        let h_e = match symmetry {
            SymmetryKind::ParabolicCylinder => 0.5 * kappa,
            SymmetryKind::Rotational => {
                if !(b.x > 0.0) {
                    return domain(format!("rotational sample {i} has x = {} on or behind the axis", b.x));
                }
                0.5 * (kappa + sin_t / b.x)
            }
        };
        // N_e = (-sin, 0, cos) for both families (rotated by the angle t in the rotational case).
        let n3 = cos_t;
        let h = hyperbolic_from_euclidean(b.z, h_e, n3)?;
        out.push((b.t, h - horo_normal_component(b.z, n3)));
    }
    Ok(out)
}

/// Maximum and RMS of the finite-difference horo-shrinker residual over the
/// interior samples of `curve`.
pub fn shrinker_residual(curve: &GeneratingCurve, symmetry: SymmetryKind) -> Result<VerificationReport> {
    let profile = residual_profile(curve, symmetry)?;
    let (mut max, mut at, mut sq) = (0.0_f64, profile[0].0, 0.0);
    for &(t, r) in &profile {
        if r.abs() > max {
            max = r.abs();
            at = t;
        }
        sq += r * r;
    }
    Ok(VerificationReport {
        symmetry,
        samples: curve.samples.len(),
        interior_points: profile.len(),
        max_residual: max,
        rms_residual: (sq / profile.len() as f64).sqrt(),
        max_residual_at: at,
        first_integral_drift: None,
        energy_residual: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn horosphere_mean_curvature() {
        assert_eq!(hyperbolic_from_euclidean(1.0, 0.0, 1.0).unwrap(), 1.0);
        let c = 3.5;
        assert_eq!(hyperbolic_from_euclidean(c, 0.0, 1.0).unwrap(), 1.0);
        assert_eq!(horo_normal_component(c, 1.0), 1.0 / c);
        assert_eq!(hyperbolic_from_euclidean(5.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn non_positive_height_is_rejected() {
        assert!(matches!(
            hyperbolic_from_euclidean(0.0, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            hyperbolic_from_euclidean(-2.0, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(UpperHalfSpacePoint::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn curvature_sample_requires_unit_normal() {
        let p = UpperHalfSpacePoint::new(0.0, 0.0, 2.0).unwrap();
        assert!(CurvatureSample::new(p, 0.0, [0.0, 0.0, 1.1]).is_err());
        let c = CurvatureSample::new(p, 0.25, [0.0, 0.6, 0.8]).unwrap();
        assert_eq!(c.hyperbolic_mean_curvature, 2.0 * 0.25 + 0.8);
    }

    fn line(family: CurveFamily, n: usize, f: impl Fn(f64) -> (f64, f64)) -> GeneratingCurve {
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let (x, z) = f(t);
                CurveSample { t, x, z, theta: 0.0 }
            })
            .collect();
        GeneratingCurve::new(family, samples)
    }

    #[test]
    fn horosphere_and_vertical_plane_have_zero_residual() {
        let h1 = line(CurveFamily::Bowl, 50, |t| (0.1 + 3.0 * t, 1.0));
        let rep = shrinker_residual(&h1, SymmetryKind::Rotational).unwrap();
        assert!(rep.max_residual < 1e-12, "{rep:?}");

        let plane = line(CurveFamily::Grim, 50, |t| (0.7, 0.2 + 5.0 * t));
        let rep = shrinker_residual(&plane, SymmetryKind::ParabolicCylinder).unwrap();
        assert!(rep.max_residual < 1e-12, "{rep:?}");
        assert_eq!(rep.interior_points, 48);
    }

    #[test]
    fn other_horospheres_are_not_shrinkers() {
        let c = 2.0;
        let h = line(CurveFamily::Grim, 20, |t| (t, c));
        let rep = shrinker_residual(&h, SymmetryKind::ParabolicCylinder).unwrap();
        // H = 1, <N, d/dz> = 1/c.
        assert!((rep.max_residual - (1.0 - 1.0 / c)).abs() < 1e-14);
    }

    #[test]
    fn residual_preconditions() {
        let short = line(CurveFamily::Grim, 4, |t| (t, 1.0));
        assert!(matches!(
            shrinker_residual(&short, SymmetryKind::ParabolicCylinder),
            Err(Error::TooFewSamples { needed: 5, got: 4 })
        ));
        let through_axis = line(CurveFamily::Bowl, 10, |t| (t - 0.5, 1.0));
        assert!(matches!(
            shrinker_residual(&through_axis, SymmetryKind::Rotational),
            Err(Error::Domain(_))
        ));
        // The axis itself is allowed at the endpoints.
        let from_axis = line(CurveFamily::Bowl, 10, |t| (t, 1.0));
        assert!(shrinker_residual(&from_axis, SymmetryKind::Rotational).is_ok());
    }

    #[test]
    fn euclidean_circle_curvature_is_recovered() {
        // Circle of radius 2 centred high above the boundary, traversed counter-clockwise.
        let n = 400;
        let samples: Vec<CurveSample> = (0..n)
            .map(|i| {
                let t = 0.2 + 2.0 * i as f64 / n as f64;
                CurveSample {
                    t,
                    x: 2.0 * t.cos(),
                    z: 10.0 + 2.0 * t.sin(),
                    theta: 0.0,
                }
            })
            .collect();
        let curve = GeneratingCurve::new(CurveFamily::Grim, samples);
        let profile = residual_profile(&curve, SymmetryKind::ParabolicCylinder).unwrap();
        for (i, (t, r)) in profile.iter().enumerate() {
            let s = &curve.samples[i + 1];
            // tangent (-sin t, cos t); N_e3 = cos(theta) = -sin t; kappa = 1/2.
            let n3 = -t.sin();
            let expect = s.z * 0.25 + n3 - n3 / s.z;
            assert!((r - expect).abs() < 1e-4, "t={t}: {r} vs {expect}");
        }
    }

    proptest! {
        #[test]
        fn normal_component_matches_hyperbolic_inner_product(
            phi in 0.0..std::f64::consts::TAU,
            cos_polar in -1.0f64..1.0,
            z in 1e-3f64..1e3,
        ) {
            let sin_polar = (1.0 - cos_polar * cos_polar).sqrt();
            let n_e = [sin_polar * phi.cos(), sin_polar * phi.sin(), cos_polar];
            let p = UpperHalfSpacePoint::new(0.3, -1.2, z).unwrap();
            let n = [z * n_e[0], z * n_e[1], z * n_e[2]];
            let via_metric = p.inner(n, [0.0, 0.0, 1.0]);
            let direct = horo_normal_component(z, n_e[2]);
            prop_assert!((via_metric - direct).abs() <= 1e-14 * (1.0 + direct.abs()));
            // N is a hyperbolic unit vector.
            prop_assert!((p.inner(n, n) - 1.0).abs() < 1e-12);
        }
    }
}
