use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index window [{lo}, {hi}] does not intersect the source window")]
    EmptyWindow { lo: i64, hi: i64 },

    #[error("index {index} outside the window of the operator")]
    OutOfWindow { index: i64 },

    #[error("continued-fraction breakdown at index {index}: denominator magnitude {magnitude:e}")]
    Breakdown { index: i64, magnitude: f64 },

    #[error("Newton iteration diverged from {start} after {iters} iterations")]
    Divergence { start: String, iters: usize },

    #[error("contour passes too close to a zero or pole of the secular function")]
    ContourSingular,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension {dim} exceeds the dense oracle limit of {limit}")]
    OracleTooLarge { dim: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
