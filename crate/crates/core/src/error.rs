use thiserror::Error;

/// Errors raised by the simulation, metric, fitting and optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("no sample lies above the intensity floor; phase is undefined everywhere")]
    EmptyPhase,

    #[error("axis mismatch: {0}")]
    GridMismatch(String),

    #[error("data show no decay after the rising edge")]
    NoDecay,

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
