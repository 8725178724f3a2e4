use thiserror::Error;

/// Errors raised by the inference engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbcError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("statistic `{statistic}` is not defined for {data} data")]
    IncompatibleStatistic {
        statistic: &'static str,
        data: &'static str,
    },

    #[error("need at least {required} pilot summaries, got {actual}")]
    TooFewPilots { required: usize, actual: usize },

    #[error("Cholesky factorisation failed; covariance is not positive definite (increase the ridge)")]
    NotPositiveDefinite,

    #[error("model does not provide {0}")]
    Unsupported(&'static str),

    #[error("surrogate fit does not match kernel `{0}`")]
    KindMismatch(&'static str),

    #[error("negative weight {0} at index {1}")]
    NegativeWeight(f64, usize),

    #[error("weighted sample is degenerate (all weights are zero)")]
    Degenerate,

    #[error("oracle refused: {0}")]
    OracleTooLarge(String),
}

pub type Result<T> = std::result::Result<T, AbcError>;
