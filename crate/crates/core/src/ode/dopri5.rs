use roots::{find_root_brent, Convergency, SearchError};

use super::events::{brackets, Event, EventSpec};
use super::{OutOfDomain, PointTag, Solution, SolverConfig, Stats, Status, Trajectory, VectorField};
use crate::error::{Error, Result};

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Continuous extension: y(s + θh) = y + h Σ_i k_i Σ_j P[i][j] θ^(j+1).
const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0; 4],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// One accepted step, kept long enough to interpolate inside it.
struct Step<'k> {
    s: f64,
    h: f64,
    y: &'k [f64],
    k: &'k [Vec<f64>; 7],
}

impl Step<'_> {
    fn interpolate(&self, theta: f64, out: &mut [f64]) {
        let powers = [theta, theta * theta, theta.powi(3), theta.powi(4)];
        let weights: [f64; 7] = std::array::from_fn(|i| P[i].iter().zip(&powers).map(|(p, t)| p * t).sum());
        for (j, o) in out.iter_mut().enumerate() {
            let incr: f64 = (0..7).map(|i| weights[i] * self.k[i][j]).sum();
            *o = self.y[j] + self.h * incr;
        }
    }
}

/// Stops only on bracket width; never on a small function value.
struct WidthOnly {
    tol: f64,
    max_iter: usize,
}

impl Convergency<f64> for WidthOnly {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() < self.tol
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.max_iter
    }
}

enum Attempt {
    Ok,
    OutOfDomain,
}

fn eval_checked(field: &dyn VectorField, s: f64, y: &[f64], dy: &mut [f64], evals: &mut usize) -> Result<Attempt> {
    *evals += 1;
    match field.eval(s, y, dy) {
        Ok(()) => {
            if dy.iter().all(|v| v.is_finite()) {
                Ok(Attempt::Ok)
            } else {
                Err(Error::NonFinite { s })
            }
        }
        Err(OutOfDomain(_)) => Ok(Attempt::OutOfDomain),
    }
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], cfg: &SolverConfig) -> f64 {
    let n = y.len() as f64;
    let sum: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            let sk = cfg.atol + cfg.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step(
    field: &dyn VectorField,
    s0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    h_max: f64,
    cfg: &SolverConfig,
    evals: &mut usize,
) -> Result<f64> {
    let n = y0.len() as f64;
    let sk: Vec<f64> = y0.iter().map(|y| cfg.atol + cfg.rtol * y.abs()).collect();
    let dnf = (f0.iter().zip(&sk).map(|(f, s)| (f / s).powi(2)).sum::<f64>() / n).sqrt();
    let dny = (y0.iter().zip(&sk).map(|(y, s)| (y / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h = if dnf <= 1e-5 || dny <= 1e-5 {
        1e-6
    } else {
        0.01 * dny / dnf
    };
    h = h.min(h_max);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    if let Attempt::OutOfDomain = eval_checked(field, s0 + dir * h, &y1, &mut f1, evals)? {
        return Ok(h * 1e-3);
    }
    let der2 = (f1
        .iter()
        .zip(f0)
        .zip(&sk)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h;
    let der12 = der2.abs().max(dnf);
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(h_max))
}

pub(super) fn run(
    field: &dyn VectorField,
    y0: &[f64],
    span: (f64, f64),
    cfg: &SolverConfig,
    specs: &[EventSpec<'_>],
    stops: &[f64],
    record_steps: bool,
) -> Result<Solution> {
    let n = y0.len();
    let (s0, s_end) = span;
    let dir = if s_end > s0 { 1.0 } else { -1.0 };
    let h_max = cfg.h_max.unwrap_or((s_end - s0).abs() / 10.0).min((s_end - s0).abs());

    // Stops strictly inside the span in integration order, ending with s_end.
    let mut targets: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|t| t.is_finite() && (t - s0) * dir > 0.0 && (t - s_end) * dir < 0.0)
        .collect();
    targets.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    targets.dedup();
    targets.push(s_end);
    let end_is_stop = stops.contains(&s_end);

    let mut stats = Stats::default();
    let mut trajectory = Trajectory::default();
    let mut events: Vec<Event> = Vec::new();

    let mut s = s0;
    let mut y = y0.to_vec();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    trajectory.push(s, &y, PointTag::Start);

    if let Attempt::OutOfDomain = eval_checked(field, s, &y, &mut k[0], &mut stats.evals)? {
        return Ok(Solution {
            trajectory,
            events,
            status: Status::DomainExit,
            stats,
            dim: n,
        });
    }

    let mut g_prev: Vec<f64> = specs.iter().map(|e| e.eval(s, &y, &k[0])).collect();
    let mut h = match cfg.h_init {
        Some(h) => h.min(h_max),
        None => initial_step(field, s, &y, &k[0], dir, h_max, cfg, &mut stats.evals)?,
    };
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut target_idx = 0;
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut dscratch = vec![0.0; n];

    let status = loop {
        if target_idx >= targets.len() {
            break Status::Completed;
        }
        if stats.accepted >= cfg.max_steps {
            break Status::MaxSteps;
        }
        let target = targets[target_idx];
        let remaining = (target - s).abs();
        let lands = h >= remaining * (1.0 - 1e-12);
        let h_step = if lands { remaining } else { h };
        let min_step = 16.0 * f64::EPSILON * s.abs().max(f64::MIN_POSITIVE);
        if h_step <= min_step {
            break Status::StepUnderflow;
        }
        let hs = dir * h_step;

        // Stages 2..7.
        let mut domain_exit = false;
        for i in 1..7 {
            for j in 0..n {
                let mut acc = 0.0;
                for (l, a) in A[i].iter().enumerate().take(i) {
                    acc += a * k[l][j];
                }
                stage[j] = y[j] + hs * acc;
            }
            let (_, tail) = k.split_at_mut(i);
            if let Attempt::OutOfDomain = eval_checked(field, s + C[i] * hs, &stage, &mut tail[0], &mut stats.evals)? {
                domain_exit = true;
                break;
            }
            if i == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        if domain_exit {
            stats.rejected += 1;
            last_rejected = true;
            h = h_step * 0.25;
            if h <= min_step {
                break Status::DomainExit;
            }
            continue;
        }
        for j in 0..n {
            err[j] = hs * (0..7).map(|i| E[i] * k[i][j]).sum::<f64>();
        }
        let err_norm = error_norm(&y, &y_new, &err, cfg);
        if !err_norm.is_finite() {
            return Err(Error::NonFinite { s });
        }

        let fac11 = err_norm.powf(0.2 - BETA * 0.75);
        if err_norm > 1.0 {
            stats.rejected += 1;
            last_rejected = true;
            h = h_step / (1.0 / FAC_MIN).min(fac11 / SAFETY);
            continue;
        }

        // Accepted.
        stats.accepted += 1;
        let s_new = if lands { target } else { s + hs };
        let step = Step {
            s,
            h: s_new - s,
            y: &y,
            k: &k,
        };

        // Event detection on this step, ordered by location.
        let g_new: Vec<f64> = specs.iter().map(|e| e.eval(s_new, &y_new, &k[6])).collect();
        let mut found: Vec<(f64, usize)> = Vec::new();
        for (idx, spec) in specs.iter().enumerate() {
            if !brackets(g_prev[idx], g_new[idx]) {
                continue;
            }
            let theta = if g_new[idx] == 0.0 {
                1.0
            } else {
                refine_root(
                    field,
                    spec,
                    &step,
                    g_prev[idx],
                    g_new[idx],
                    cfg,
                    &mut scratch,
                    &mut dscratch,
                    &mut stats,
                )?
            };
            found.push((theta, idx));
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut terminated = false;
        for (theta, idx) in found {
            let spec = &specs[idx];
            let s_ev = if theta == 1.0 { s_new } else { s + theta * step.h };
            if theta == 1.0 {
                scratch.copy_from_slice(&y_new);
            } else {
                step.interpolate(theta, &mut scratch);
            }
            let (left, right) = if dir > 0.0 {
                (g_prev[idx], g_new[idx])
            } else {
                (g_new[idx], g_prev[idx])
            };
            let kind = spec.classify(left, right);
            if let Some(last) = events.last() {
                if last.spec == idx && (last.s - s_ev).abs() <= cfg.event_tol {
                    continue;
                }
            }
            events.push(Event {
                kind,
                s: s_ev,
                state: scratch.clone(),
                spec: idx,
            });
            if theta < 1.0 {
                trajectory.push(s_ev, &scratch, PointTag::Event);
            }
            if spec.stops_on(kind) {
                if theta == 1.0 {
                    trajectory.push(s_ev, &scratch, PointTag::Event);
                }
                terminated = true;
                break;
            }
        }
        if terminated {
            break Status::Terminated;
        }

        let tag = if lands && (target_idx + 1 < targets.len() || end_is_stop) {
            PointTag::Stop
        } else {
            PointTag::Step
        };
        let is_final = lands && target_idx + 1 == targets.len();
        if record_steps || tag == PointTag::Stop || is_final {
            trajectory.push(s_new, &y_new, tag);
        }

        s = s_new;
        std::mem::swap(&mut y, &mut y_new);
        let (first, rest) = k.split_at_mut(1);
        std::mem::swap(&mut first[0], &mut rest[5]);
        g_prev = g_new;
        if lands {
            target_idx += 1;
        }

        let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let mut h_new = (h_step / fac).min(h_max);
        fac_old = err_norm.max(1e-4);
        if last_rejected {
            h_new = h_new.min(h_step);
        }
        last_rejected = false;
        // A step shortened to land on a target must not throttle the next one.
        h = if lands { h_new.max(h.min(h_max)) } else { h_new };
    };

    // Keep the last state in the trajectory even when the loop stopped early.
    if trajectory.s.last() != Some(&s) && !matches!(status, Status::Terminated) {
        trajectory.push(s, &y, PointTag::Step);
    }

    events.sort_by(|a, b| ((a.s - s0).abs()).total_cmp(&(b.s - s0).abs()));
    Ok(Solution {
        trajectory,
        events,
        status,
        stats,
        dim: n,
    })
}

#[allow(clippy::too_many_arguments)]
fn refine_root(
    field: &dyn VectorField,
    spec: &EventSpec<'_>,
    step: &Step<'_>,
    g_left: f64,
    g_right: f64,
    cfg: &SolverConfig,
    y_buf: &mut [f64],
    dy_buf: &mut [f64],
    stats: &mut Stats,
) -> Result<f64> {
    let mut failure: Option<Error> = None;
    let tol = (cfg.event_tol / step.h.abs()).max(4.0 * f64::EPSILON);
    let mut conv = WidthOnly { tol, max_iter: 200 };
    let needs_dy = spec.needs_derivative();
    let g = |theta: f64| -> f64 {
        if theta <= 0.0 {
            return g_left;
        }
        if theta >= 1.0 {
            return g_right;
        }
        step.interpolate(theta, y_buf);
        let s = step.s + theta * step.h;
        if needs_dy {
            stats.evals += 1;
            match field.eval(s, y_buf, dy_buf) {
                Ok(()) => {}
                Err(OutOfDomain(msg)) => {
                    failure.get_or_insert(Error::RootFinding(format!("field left its domain at s = {s}: {msg}")));
                    return f64::NAN;
                }
            }
        }
        spec.eval(s, y_buf, dy_buf)
    };
    let root = find_root_brent(0.0, 1.0, g, &mut conv);
    if let Some(e) = failure {
        return Err(e);
    }
    match root {
        Ok(theta) => Ok(theta.clamp(0.0, 1.0)),
        Err(SearchError::NoBracketing) => Err(Error::RootFinding(
            "event function not bracketed on the interpolant".into(),
        )),
        Err(e) => Err(Error::RootFinding(format!("{e:?}"))),
    }
}

#[cfg(test)]
mod tableau {
    use super::*;

    #[test]
    fn weights_are_consistent() {
        for i in 1..7 {
            let row: f64 = A[i].iter().sum();
            assert!((row - C[i]).abs() < 1e-15, "row {i}");
        }
        let e: f64 = E.iter().sum();
        assert!(e.abs() < 1e-15);
        // Continuous extension at theta = 1 reproduces the 5th-order weights.
        for i in 0..7 {
            let b = if i < 6 { A[6][i] } else { 0.0 };
            let p: f64 = P[i].iter().sum();
            assert!((p - b).abs() < 1e-14, "P row {i}: {p} vs {b}");
        }
    }
}
