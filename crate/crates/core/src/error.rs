use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounds: max ({max}) must exceed min ({min})")]
    InvalidBounds { min: f64, max: f64 },
    #[error("too few points: {n} (need at least 3)")]
    TooFewPoints { n: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("representation does not match the model or grids: {0}")]
    RepresentationMismatch(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("linear solve failed after {iterations} iterations (residual {residual:.3e})")]
    LinearSolve { iterations: usize, residual: f64 },
    #[error("non-finite value encountered at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },
    #[error("grid too small: boundary amplitude {amplitude:.3e} exceeds {limit:.1e}")]
    GridTooSmall { amplitude: f64, limit: f64 },
    #[error("stride mismatch: {0}")]
    StrideMismatch(String),
    #[error("too few samples: {actual} (need at least {needed})")]
    TooFewSamples { needed: usize, actual: usize },
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("config validation error in `{key}`: {reason}")]
    ConfigInvalid { key: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
