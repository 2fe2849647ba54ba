use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("jets live in different frames or around different base points")]
    FrameMismatch,

    #[error("insufficient order for {what}: need {needed}, have {have}")]
    InsufficientOrder {
        what: &'static str,
        needed: i32,
        have: i32,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode budget {budget} needs at least {needed} samples, got {samples}")]
    Aliasing {
        budget: usize,
        needed: usize,
        samples: usize,
    },

    #[error("mode {mode} outside window [{lo}, {hi}]")]
    OutOfWindow { mode: i32, lo: i32, hi: i32 },

    #[error("linear system incompatible at degree {degree} (residual {residual:e})")]
    Compatibility { degree: usize, residual: f64 },

    #[error("lambda expansion does not truncate: coefficient of lambda^{power} has norm {norm:e}")]
    NonTruncating { power: i32, norm: f64 },

    #[error("two-sided consistency identity violated (residual {residual:e})")]
    Consistency { residual: f64 },

    #[error("no lift exists: {0}")]
    NoSolution(String),

    #[error("lift is not unique: {free} free parameters")]
    NonUnique { free: usize },

    #[error("matrix is not invertible")]
    Singular,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
