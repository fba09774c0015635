//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight {index} is {value}, but all weights must be strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("column index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("duplicate column index {index}; indices must be distinct")]
    DuplicateIndex { index: usize },

    #[error("matrix is not symmetric positive semidefinite within tolerance")]
    NotPositiveSemidefinite,

    #[error("singular value decomposition did not converge")]
    ConvergenceFailure,

    #[error("rank(f) < k = {k}: the volume-sampling density is undefined")]
    RankDeficient { k: usize },

    #[error("{subsets} subsets of size {k} exceed the enumeration cap {cap}")]
    CombinatorialBlowup { subsets: u128, k: usize, cap: u64 },

    #[error("no size-{k} subset with nonzero volume found to start the chain")]
    NoNonzeroStart { k: usize },

    #[error("prescribed spectrum has {len} values, but rank cannot exceed min(m, n) = {max}")]
    SpectrumTooLong { len: usize, max: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown strategy {0:?} (expected exhaustive, volume-best-of, greedy-residual or greedy-volume)")]
    UnknownStrategy(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
