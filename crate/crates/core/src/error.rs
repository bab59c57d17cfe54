use thiserror::Error;

/// Errors raised by the solvers, the verification oracle and file IO.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation (e.g. a non-positive height).
    #[error("domain error: {0}")]
    Domain(String),

    /// A required precondition on the input does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid solver configuration: {0}")]
    Config(String),

    /// The vector field produced a NaN or infinite value.
    #[error("vector field returned a non-finite value at s = {s}")]
    NonFinite { s: f64 },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("Picard iteration did not converge after {iterations} iterations (last delta {last_delta:e})")]
    PicardNotConverged { iterations: usize, last_delta: f64 },

    /// The Picard operator left the region where the inverse of y/sqrt(1+y^2) is defined.
    #[error("Picard setup violated: inner integral reached {value} at r = {r}")]
    PicardSetup { r: f64, value: f64 },

    #[error("root refinement failed: {0}")]
    RootFinding(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
