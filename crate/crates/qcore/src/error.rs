//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("space too large: dim {dim} exceeds cap {cap}")]
    SpaceTooLarge { dim: usize, cap: usize },

    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error("tolerance not achieved: {0}")]
    ToleranceNotAchieved(String),

    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); system may be stiff")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("insensitive observable: slope magnitude below guard")]
    InsensitiveObservable,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("grid too small to contain state support: {0}")]
    GridTooSmall(String),

    #[error("no finite optimum: {0}")]
    NoOptimum(String),

    #[error("spontaneous emission not supported in this version (gamma must be 0)")]
    SpontaneousEmissionUnsupported,

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
