//! Fixed-point construction of the bowl profile near the axis.
//!
//! With `g(z, p) = 2 (1 - z) / (z² √(1 + p²))` and `φ(p) = p / √(1 + p²)`, a
//! profile with `z(0) = z0`, `z'(0) = 0` is a fixed point of
//!
//! ```text
//! (T z)(r) = z0 + ∫₀^r φ⁻¹( (1/s) ∫₀^s t g(z, z') dt ) ds.
//! ```
//!
//! `T` is a contraction on the ball of radius `ε` about `z0` in `C¹([0, R])`
//! for `R ≤ min(1/M, √3 ε / 2, √3 ε / (2M))`, where `M` bounds
//! `|2 (1 - z) / z²|` on `[z0 - ε, z0 + ε]`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Parameters of the Picard iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardSetup {
    pub z0: f64,
    pub epsilon: f64,
    pub m: f64,
    pub r: f64,
    pub contraction_tol: f64,
    pub max_iters: usize,
    /// Number of grid intervals on `[0, r]`.
    pub intervals: usize,
}

fn source_bound(z: f64) -> f64 {
    (2.0 * (1.0 - z) / (z * z)).abs()
}

/// Largest `|2 (1 - z) / z²|` on `[z0 - eps, z0 + eps]`: the function is
/// monotone on `(0, 1]`, increasing on `[1, 2]` and decreasing beyond.
pub fn band_bound(z0: f64, eps: f64) -> f64 {
    let (lo, hi) = (z0 - eps, z0 + eps);
    let mut m = source_bound(lo).max(source_bound(hi));
    if lo <= 2.0 && 2.0 <= hi {
        m = m.max(source_bound(2.0));
    }
    m
}

/// `min(1/M, √3 ε / 2, √3 ε / (2M))`.
pub fn radius_bound(eps: f64, m: f64) -> f64 {
    let c = 3f64.sqrt() * eps / 2.0;
    (1.0 / m).min(c).min(c / m)
}

impl PicardSetup {
    /// Default setup: `ε = min(z0, 1) / 2`, `R` at its bound, tolerance `1e-12`.
    pub fn new(z0: f64) -> Result<Self> {
        if !(z0 > 0.0) || !z0.is_finite() {
            return domain(format!("axis height must be positive, got {z0}"));
        }
        let epsilon = z0.min(1.0) / 2.0;
        let m = band_bound(z0, epsilon);
        Ok(Self {
            z0,
            epsilon,
            m,
            r: radius_bound(epsilon, m),
            contraction_tol: 1e-12,
            max_iters: 100,
            intervals: 4096,
        })
    }

    /// Same setup on a shorter interval.
    pub fn with_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= self.r) {
            return Err(Error::Precondition(format!(
                "radius {r} must lie in (0, {}] for the contraction bound",
                self.r
            )));
        }
        self.r = r;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z0 > 0.0) {
            return domain(format!("axis height must be positive, got {}", self.z0));
        }
        if !(self.epsilon > 0.0 && self.epsilon < self.z0.min(1.0)) {
            return Err(Error::Precondition(format!(
                "epsilon must lie in (0, min(z0, 1)), got {}",
                self.epsilon
            )));
        }
        let m = band_bound(self.z0, self.epsilon);
        if self.m < m * (1.0 - 1e-15) {
            return Err(Error::Precondition(format!(
                "M = {} is below the band maximum {m}",
                self.m
            )));
        }
        if !(self.r > 0.0 && self.r <= radius_bound(self.epsilon, self.m) * (1.0 + 1e-15)) {
            return Err(Error::Precondition(format!(
                "R = {} exceeds the contraction bound",
                self.r
            )));
        }
        if self.intervals < 3 || self.max_iters == 0 || !(self.contraction_tol > 0.0) {
            return Err(Error::Precondition(
                "need at least 3 grid intervals, 1 iteration and a positive tolerance".into(),
            ));
        }
        Ok(())
    }
}

/// Fixed point on the uniform grid with its convergence history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardResult {
    pub setup: PicardSetup,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub dz: Vec<f64>,
    pub iterations: usize,
    /// `sup |Δz| + sup |Δz'|` after each application of `T`.
    pub deltas: Vec<f64>,
}

impl PicardResult {
    /// Cubic Hermite interpolation of `(z, z')` at `r`.
    pub fn eval(&self, r: f64) -> Result<(f64, f64)> {
        let n = self.r.len() - 1;
        let r_max = self.r[n];
        if !(0.0..=r_max).contains(&r) {
            return Err(Error::Precondition(format!(
                "r = {r} outside the Picard interval [0, {r_max}]"
            )));
        }
        let h = r_max / n as f64;
        let j = ((r / h).floor() as usize).min(n - 1);
        let t = (r - self.r[j]) / h;
        let (z0, z1, d0, d1) = (self.z[j], self.z[j + 1], self.dz[j] * h, self.dz[j + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let z =
            (2.0 * t3 - 3.0 * t2 + 1.0) * z0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * z1 + (t3 - t2) * d1;
        let dz = ((6.0 * t2 - 6.0 * t) * z0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * z1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        Ok((z, dz))
    }

    /// `z''(0)` estimated as `z'(h) / h` on the first grid cell.
    pub fn axis_second_derivative(&self) -> f64 {
        self.dz[1] / self.r[1]
    }

    /// True when every delta is smaller than the previous one.
    pub fn strictly_decreasing(&self) -> bool {
        self.deltas.windows(2).all(|w| w[1] < w[0])
    }
}

// Running integral of samples on a uniform grid, fourth order.
fn cumulative(f: &[f64], h: f64, out: &mut [f64]) {
    let n = f.len() - 1;
    let c = h / 24.0;
    out[0] = 0.0;
    out[1] = c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    for j in 1..n - 1 {
        out[j + 1] = out[j] + c * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2]);
    }
    if n >= 2 {
        out[n] = out[n - 1] + c * (f[n - 3] - 5.0 * f[n - 2] + 19.0 * f[n - 1] + 9.0 * f[n]);
    }
}

/// One application of `T` to the grid function `(z, z')`.
pub(crate) fn apply_operator(z0: f64, r: &[f64], z: &[f64], dz: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = r.len() - 1;
    let h = r[n] / n as f64;
    let mut f = vec![0.0; n + 1];
    for j in 0..=n {
        if !(z[j] > 0.0) {
            return Err(Error::PicardSetup { r: r[j], value: z[j] });
        }
        f[j] = r[j] * 2.0 * (1.0 - z[j]) / (z[j] * z[j] * (1.0 + dz[j] * dz[j]).sqrt());
    }
    let mut inner = vec![0.0; n + 1];
    cumulative(&f, h, &mut inner);
    let mut new_dz = vec![0.0; n + 1];
    for j in 1..=n {
        let v = inner[j] / r[j];
        if !(v.abs() < 1.0) {
            return Err(Error::PicardSetup { r: r[j], value: v });
        }
        new_dz[j] = v / (1.0 - v * v).sqrt();
    }
    let mut new_z = vec![0.0; n + 1];
    cumulative(&new_dz, h, &mut new_z);
    new_z.iter_mut().for_each(|v| *v += z0);
    Ok((new_z, new_dz))
}

/// Iterates `T` from the constant `z0` until successive iterates differ by less
/// than `setup.contraction_tol` in `sup |Δz| + sup |Δz'|`.
pub fn picard_iterate(setup: &PicardSetup) -> Result<PicardResult> {
    setup.validate()?;
    let n = setup.intervals;
    let r: Vec<f64> = (0..=n).map(|j| setup.r * j as f64 / n as f64).collect();
    let mut z = vec![setup.z0; n + 1];
    let mut dz = vec![0.0; n + 1];
    let mut deltas = Vec::new();
    for it in 1..=setup.max_iters {
        let (nz, ndz) = apply_operator(setup.z0, &r, &z, &dz)?;
        let dz_sup = z.iter().zip(&nz).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dp_sup = dz.iter().zip(&ndz).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let delta = dz_sup + dp_sup;
        deltas.push(delta);
        z = nz;
        dz = ndz;
        if delta < setup.contraction_tol {
            return Ok(PicardResult {
                setup: *setup,
                r,
                z,
                dz,
                iterations: it,
                deltas,
            });
        }
    }
    Err(Error::PicardNotConverged {
        iterations: setup.max_iters,
        last_delta: *deltas.last().unwrap_or(&f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_setups() {
        let s = PicardSetup::new(0.5).unwrap();
        assert_eq!(s.epsilon, 0.25);
        assert_eq!(s.m, 24.0);
        assert!((s.r - 3f64.sqrt() * 0.25 / 48.0).abs() < 1e-16);
        let s = PicardSetup::new(2.0).unwrap();
        assert_eq!(s.epsilon, 0.5);
        // Interior maximum of the band at z = 2.
        assert_eq!(s.m, 0.5);
        assert!(PicardSetup::new(0.0).is_err());
    }

    #[test]
    fn horosphere_is_fixed_after_one_step() {
        let res = picard_iterate(&PicardSetup::new(1.0).unwrap()).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.z.iter().all(|&v| v == 1.0));
        assert_eq!(res.deltas, vec![0.0]);
    }

    #[test]
    fn one_application_matches_closed_form() {
        for z0 in [0.5, 2.0, 0.8] {
            let s = PicardSetup::new(z0).unwrap();
            let n = 512;
            let r: Vec<f64> = (0..=n).map(|j| s.r * j as f64 / n as f64).collect();
            let (z, dz) = apply_operator(z0, &r, &vec![z0; n + 1], &vec![0.0; n + 1]).unwrap();
            let g = 2.0 * (1.0 - z0) / (z0 * z0);
            for j in 0..=n {
                let u = g * r[j] / 2.0;
                let exact = z0 + (2.0 / g) * (1.0 - (1.0 - u * u).sqrt());
                let exact_dz = u / (1.0 - u * u).sqrt();
                assert!((z[j] - exact).abs() < 1e-13, "z0={z0} r={}", r[j]);
                assert!((dz[j] - exact_dz).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn converges_with_decreasing_deltas() {
        for (z0, curvature) in [(0.5, 2.0), (2.0, -0.25)] {
            let res = picard_iterate(&PicardSetup::new(z0).unwrap()).unwrap();
            assert!(res.strictly_decreasing(), "{:?}", res.deltas);
            assert!(*res.deltas.last().unwrap() < 1e-12);
            assert!((res.axis_second_derivative() - curvature).abs() < 1e-6);
        }
    }

    #[test]
    fn bad_setups_are_rejected() {
        let mut s = PicardSetup::new(0.5).unwrap();
        s.r *= 2.0;
        assert!(picard_iterate(&s).is_err());
        let mut s = PicardSetup::new(0.5).unwrap();
        s.m = 1.0;
        assert!(picard_iterate(&s).is_err());
        let mut s = PicardSetup::new(0.5).unwrap();
        s.max_iters = 1;
        assert!(matches!(picard_iterate(&s), Err(Error::PicardNotConverged { .. })));
    }

    #[test]
    fn hermite_interpolation_is_accurate() {
        let res = picard_iterate(&PicardSetup::new(2.0).unwrap()).unwrap();
        let mid = (res.r[10] + res.r[11]) / 2.0;
        let (z, _) = res.eval(mid).unwrap();
        // z ≈ z0 + a r²/2 for small r.
        assert!((z - (2.0 - 0.25 * mid * mid / 2.0)).abs() < 1e-9);
        assert!(res.eval(res.setup.r * 1.01).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn band_bound_dominates_dense_sampling(z0 in 0.05f64..8.0) {
            let eps = z0.min(1.0) / 2.0;
            let m = band_bound(z0, eps);
            for k in 0..=400 {
                let z = z0 - eps + 2.0 * eps * k as f64 / 400.0;
                prop_assert!(source_bound(z) <= m * (1.0 + 1e-14));
            }
            let r = radius_bound(eps, m);
            prop_assert!(r <= 1.0 / m && r <= 3f64.sqrt() * eps / 2.0 && r <= 3f64.sqrt() * eps / (2.0 * m));
        }
    }
}
