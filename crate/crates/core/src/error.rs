use thiserror::Error;

use crate::basis::MultiIndex;

/// Errors raised by the interpolation, pivoting and solver layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is numerically singular (pivot {pivot:e} below {threshold:e})")]
    Singular { pivot: f64, threshold: f64 },
    #[error("interpolation data is not poised (reciprocal condition {rcond:e})")]
    NotPoised { rcond: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid multi-index {0}")]
    InvalidMultiIndex(String),
    #[error("derivative {alpha} is not available from the oracle")]
    Unavailable { alpha: MultiIndex },
    #[error(
        "completion failed at pivot {pivot}: best value {best:e} below threshold {threshold:e}"
    )]
    CompletionFailed {
        pivot: usize,
        best: f64,
        threshold: f64,
    },
    #[error("swapped data could not be recertified as poised")]
    RecertificationFailed,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
