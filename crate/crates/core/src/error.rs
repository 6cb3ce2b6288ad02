use thiserror::Error;

/// Errors produced anywhere in the belief-modeling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid arm: {0}")]
    InvalidArm(String),

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sobol generator exhausted after {0} points")]
    SobolExhausted(u64),

    #[error(
        "sample budget exceeded after {checks} collision checks \
         ({free} free, {obs} obs collected; {wanted} of each wanted)"
    )]
    BudgetExceeded {
        checks: u64,
        free: usize,
        obs: usize,
        wanted: usize,
    },

    #[error("degenerate importance weights: {0}")]
    DegenerateWeights(String),

    #[error("covariance: {0}")]
    Covariance(String),

    #[error("degenerate point set: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
