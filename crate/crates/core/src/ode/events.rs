use serde::{Deserialize, Serialize};

/// What a detected event means for the curve being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    ThetaZero,
    ZOne,
    ZExtremumMax,
    ZExtremumMin,
    XCritical,
    User,
}

/// A detected event with its refined location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub s: f64,
    pub state: Vec<f64>,
    /// Index of the [`EventSpec`] that fired.
    #[serde(skip)]
    pub spec: usize,
}

type CustomFn<'a> = Box<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'a>;

enum Condition<'a> {
    Level { index: usize, level: f64 },
    Derivative { index: usize },
    Custom(CustomFn<'a>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Terminal {
    Never,
    Always,
    On(EventKind),
}

/// An event function `g(s, y, y')` whose sign changes are reported.
pub struct EventSpec<'a> {
    kind: EventKind,
    condition: Condition<'a>,
    extremum: bool,
    terminal: Terminal,
}

impl<'a> EventSpec<'a> {
    /// Root of `y[index] - level`.
    pub fn level(kind: EventKind, index: usize, level: f64) -> Self {
        Self {
            kind,
            condition: Condition::Level { index, level },
            extremum: false,
            terminal: Terminal::Never,
        }
    }

    /// Zero of the field component `y'[index]`, reported as
    /// [`EventKind::ZExtremumMax`] or [`EventKind::ZExtremumMin`].
    pub fn z_extremum(index: usize) -> Self {
        Self {
            kind: EventKind::ZExtremumMax,
            condition: Condition::Derivative { index },
            extremum: true,
            terminal: Terminal::Never,
        }
    }

    /// Zero of the field component `y'[index]` without max/min classification.
    pub fn derivative_zero(kind: EventKind, index: usize) -> Self {
        Self {
            kind,
            condition: Condition::Derivative { index },
            extremum: false,
            terminal: Terminal::Never,
        }
    }

    pub fn custom(kind: EventKind, g: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'a) -> Self {
        Self {
            kind,
            condition: Condition::Custom(Box::new(g)),
            extremum: false,
            terminal: Terminal::Never,
        }
    }

    /// Stop the integration at the first occurrence.
    pub fn terminal(mut self) -> Self {
        self.terminal = Terminal::Always;
        self
    }

    /// Stop the integration at the first occurrence classified as `kind`.
    pub fn terminal_on(mut self, kind: EventKind) -> Self {
        self.terminal = Terminal::On(kind);
        self
    }

    pub(crate) fn needs_derivative(&self) -> bool {
        !matches!(self.condition, Condition::Level { .. })
    }

    pub(crate) fn eval(&self, s: f64, y: &[f64], dy: &[f64]) -> f64 {
        match &self.condition {
            Condition::Level { index, level } => y[*index] - level,
            Condition::Derivative { index } => dy[*index],
            Condition::Custom(g) => g(s, y, dy),
        }
    }

    /// Kind of a root bracketed by `left` (smaller s) and `right` (larger s).
    pub(crate) fn classify(&self, left: f64, right: f64) -> EventKind {
        if !self.extremum {
            return self.kind;
        }
        let is_max = if left != 0.0 { left > 0.0 } else { right < 0.0 };
        if is_max {
            EventKind::ZExtremumMax
        } else {
            EventKind::ZExtremumMin
        }
    }

    pub(crate) fn stops_on(&self, kind: EventKind) -> bool {
        match self.terminal {
            Terminal::Never => false,
            Terminal::Always => true,
            Terminal::On(k) => k == kind,
        }
    }
}

/// True when a root lies in the half-open interval (prev, new].
pub(crate) fn brackets(prev: f64, new: f64) -> bool {
    prev != 0.0 && (new == 0.0 || (prev < 0.0) != (new < 0.0))
}
