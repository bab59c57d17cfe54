//! Fixed-step classical Runge-Kutta reference, independent of the adaptive engine.
#![allow(dead_code)]

pub const RK4_STEP: f64 = 1e-5;

/// Integrates `y' = f(s, y)` from `s0` to `s1` with steps of at most `RK4_STEP`.
pub fn rk4<const N: usize>(f: impl Fn(f64, &[f64; N]) -> [f64; N], y0: [f64; N], s0: f64, s1: f64) -> [f64; N] {
    let n = ((s1 - s0).abs() / RK4_STEP).ceil().max(1.0) as usize;
    let h = (s1 - s0) / n as f64;
    let mut y = y0;
    let axpy = |y: &[f64; N], k: &[f64; N], a: f64| {
        let mut out = *y;
        for i in 0..N {
            out[i] += a * k[i];
        }
        out
    };
    for i in 0..n {
        let s = s0 + i as f64 * h;
        let k1 = f(s, &y);
        let k2 = f(s + h / 2.0, &axpy(&y, &k1, h / 2.0));
        let k3 = f(s + h / 2.0, &axpy(&y, &k2, h / 2.0));
        let k4 = f(s + h, &axpy(&y, &k3, h));
        for j in 0..N {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

/// `(x, z, θ)` of a grim reaper in hyperbolic arc length.
pub fn grim(_: f64, y: &[f64; 3]) -> [f64; 3] {
    let (s, c) = y[2].sin_cos();
    [y[1] * c, y[1] * s, 2.0 * c * (1.0 - y[1]) / y[1]]
}

/// `(x, z, θ)` of a rotational profile in Euclidean arc length.
pub fn rotational(_: f64, y: &[f64; 3]) -> [f64; 3] {
    let (s, c) = y[2].sin_cos();
    [c, s, -s / y[0] + 2.0 * c * (1.0 - y[1]) / (y[1] * y[1])]
}

/// `(z, z')` of a bowl graph over the radius.
pub fn bowl_graph(r: f64, y: &[f64; 2]) -> [f64; 2] {
    let (z, p) = (y[0], y[1]);
    [p, (1.0 + p * p) * (2.0 * (1.0 - z) / (z * z) - p / r)]
}
