use thiserror::Error;

#[derive(Debug, Error)]
pub enum HyError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("conditional state undefined at ({x:.4}, {p:.4}): weight {weight:.3e} is below the floor {floor:.1e}")]
    UndefinedConditional { x: f64, p: f64, weight: f64, floor: f64 },

    #[error("total norm drifted to {norm:.6e} at t={t:.4}; integration aborted")]
    NormBlowup { t: f64, norm: f64 },

    #[error("non-finite field value at t={t:.4}; integration aborted")]
    NonFinite { t: f64 },

    #[error("truncation unhealthy: tail mass {tail:.3e} above Fock level {level} exceeds {limit:.1e}")]
    TruncationUnhealthy { tail: f64, level: usize, limit: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type HyResult<T> = Result<T, HyError>;
