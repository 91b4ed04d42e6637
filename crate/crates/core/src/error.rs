use thiserror::Error;

/// Errors raised by the numerical modules and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("zero pivot in tridiagonal solve at row {row}")]
    ZeroPivot { row: usize },

    #[error("step rejected: {0}")]
    StepRejected(String),

    #[error("solver aborted at t = {t}: {reason}")]
    SolverAbort { t: f64, reason: String },

    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("hypothesis violated ({which}) at ({x}, {t}): value {value}")]
    HypothesisViolated { which: String, x: f64, t: f64, value: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
