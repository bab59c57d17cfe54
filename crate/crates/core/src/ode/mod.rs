//! Explicit adaptive integration of first-order systems.
//!
//! The stepper is the Dormand–Prince 5(4) embedded pair with local
//! extrapolation, a proportional-integral step-size controller and the free
//! fourth-order continuous extension. The continuous extension is used to
//! refine event roots. Integration can be made to land exactly on a list of
//! stop points, which is how uniformly sampled curves are produced without
//! interpolation noise.

mod dopri5;
mod events;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use events::{Event, EventKind, EventSpec};

/// Tolerances and step bounds for [`Integrator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when absent.
    pub h_init: Option<f64>,
    /// Largest step; a tenth of the span when absent.
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Absolute tolerance on event locations, in the independent variable.
    pub event_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: None,
            max_steps: 2_000_000,
            event_tol: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rtol) || !positive(self.atol) || !positive(self.event_tol) {
            return Err(Error::Config("rtol, atol and event_tol must be positive".into()));
        }
        if let Some(h) = self.h_max {
            if !positive(h) {
                return Err(Error::Config("h_max must be positive".into()));
            }
        }
        if let Some(h) = self.h_init {
            if !positive(h) {
                return Err(Error::Config("h_init must be positive".into()));
            }
            if let Some(hmax) = self.h_max {
                if h > hmax {
                    return Err(Error::Config("h_init must not exceed h_max".into()));
                }
            }
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Same configuration with `rtol` and `atol` divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rtol: self.rtol / factor,
            atol: self.atol / factor,
            ..*self
        }
    }
}

/// Returned by a vector field evaluated outside its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct OutOfDomain(pub String);

/// Right-hand side of `y' = f(s, y)`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OutOfDomain>;
}

/// A [`VectorField`] backed by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

pub fn field_fn<F>(dim: usize, f: F) -> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), OutOfDomain>,
{
    FnField { dim, f }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), OutOfDomain>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OutOfDomain> {
        (self.f)(s, y, dy)
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Completed,
    MaxSteps,
    StepUnderflow,
    DomainExit,
    /// A terminal event stopped the integration.
    Terminated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointTag {
    Start,
    Step,
    /// Accepted step that landed on a requested stop point.
    Stop,
    Event,
}

/// Sampled path: every accepted step, every requested stop and every event state.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub s: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub tags: Vec<PointTag>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub(crate) fn push(&mut self, s: f64, y: &[f64], tag: PointTag) {
        self.s.push(s);
        self.y.push(y.to_vec());
        self.tags.push(tag);
    }

    /// The start point followed by every point that landed on a stop.
    pub fn grid_points(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.s
            .iter()
            .zip(&self.y)
            .zip(&self.tags)
            .filter(|(_, t)| matches!(t, PointTag::Start | PointTag::Stop))
            .map(|((s, y), _)| (*s, y.as_slice()))
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.s.last().map(|s| (*s, self.y.last().unwrap().as_slice()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

/// Output of [`Integrator::run`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub trajectory: Trajectory,
    pub events: Vec<Event>,
    pub status: Status,
    pub stats: Stats,
    /// Dimension of the underlying field; accumulators follow it in each state.
    pub dim: usize,
}

impl Solution {
    pub fn final_s(&self) -> f64 {
        *self.trajectory.s.last().expect("trajectory holds the initial point")
    }

    pub fn final_state(&self) -> &[f64] {
        self.trajectory.y.last().expect("trajectory holds the initial point")
    }

    /// Accumulator values of the last point.
    pub fn final_accumulators(&self) -> &[f64] {
        &self.final_state()[self.dim..]
    }
}

type Integrand<'a> = Box<dyn Fn(f64, &[f64]) -> f64 + 'a>;

/// Builder for one integration run.
pub struct Integrator<'a> {
    field: &'a dyn VectorField,
    config: SolverConfig,
    events: Vec<EventSpec<'a>>,
    stops: Vec<f64>,
    integrands: Vec<Integrand<'a>>,
    record_steps: bool,
}

impl<'a> Integrator<'a> {
    pub fn new(field: &'a dyn VectorField, config: SolverConfig) -> Self {
        Self {
            field,
            config,
            events: Vec::new(),
            stops: Vec::new(),
            integrands: Vec::new(),
            record_steps: true,
        }
    }

    pub fn events(mut self, events: Vec<EventSpec<'a>>) -> Self {
        self.events = events;
        self
    }

    pub fn event(mut self, event: EventSpec<'a>) -> Self {
        self.events.push(event);
        self
    }

    /// Points the integration must land on exactly (outside the span they are ignored).
    pub fn stops(mut self, stops: Vec<f64>) -> Self {
        self.stops = stops;
        self
    }

    /// Adds a running integral of `q(s, y)`; its value is appended to the state.
    pub fn quadrature(mut self, q: impl Fn(f64, &[f64]) -> f64 + 'a) -> Self {
        self.integrands.push(Box::new(q));
        self
    }

    /// Keep only start, stop, event and final points in the trajectory.
    pub fn grid_only(mut self) -> Self {
        self.record_steps = false;
        self
    }

    /// Integrates from `span.0` to `span.1` (which may lie before `span.0`).
    /// `y0` holds the field state followed by the initial accumulator values.
    pub fn run(self, y0: &[f64], span: (f64, f64)) -> Result<Solution> {
        self.config.validate()?;
        let n = self.field.dim();
        let m = self.integrands.len();
        if y0.len() != n + m {
            return Err(Error::Precondition(format!(
                "initial state has {} components, expected {}",
                y0.len(),
                n + m
            )));
        }
        if !(span.0.is_finite() && span.1.is_finite()) || span.0 == span.1 {
            return Err(Error::Precondition(
                "integration span must be finite and non-degenerate".into(),
            ));
        }
        if let Some(i) = y0.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!(
                "initial state component {i} is not finite"
            )));
        }
        let augmented = Augmented {
            base: self.field,
            integrands: &self.integrands,
        };
        let mut solution = dopri5::run(
            &augmented,
            y0,
            span,
            &self.config,
            &self.events,
            &self.stops,
            self.record_steps,
        )?;
        solution.dim = n;
        Ok(solution)
    }
}

struct Augmented<'f, 'a> {
    base: &'f dyn VectorField,
    integrands: &'f [Integrand<'a>],
}

impl VectorField for Augmented<'_, '_> {
    fn dim(&self) -> usize {
        self.base.dim() + self.integrands.len()
    }

    fn eval(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OutOfDomain> {
        let n = self.base.dim();
        self.base.eval(s, &y[..n], &mut dy[..n])?;
        for (j, q) in self.integrands.iter().enumerate() {
            dy[n + j] = q(s, &y[..n]);
        }
        Ok(())
    }
}

/// Integrates `field` from `y0` over `span`, reporting the requested events.
pub fn integrate(
    field: &dyn VectorField,
    y0: &[f64],
    span: (f64, f64),
    config: &SolverConfig,
    events: Vec<EventSpec<'_>>,
) -> Result<Solution> {
    Integrator::new(field, *config).events(events).run(y0, span)
}

/// Like [`integrate`], with running integrals of `integrands` carried as extra
/// state components that start at `q0`.
pub fn integrate_with_quadrature<'a>(
    field: &'a dyn VectorField,
    integrands: Vec<Box<dyn Fn(f64, &[f64]) -> f64 + 'a>>,
    y0: &[f64],
    q0: &[f64],
    span: (f64, f64),
    config: &SolverConfig,
) -> Result<Solution> {
    if integrands.len() != q0.len() {
        return Err(Error::Precondition(
            "one initial accumulator value per integrand is required".into(),
        ));
    }
    let mut integrator = Integrator::new(field, *config);
    integrator.integrands = integrands;
    let mut state = y0.to_vec();
    state.extend_from_slice(q0);
    integrator.run(&state, span)
}
