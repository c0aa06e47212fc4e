use thiserror::Error;

/// Errors raised by the numeric routines, the model synthesizer and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The (restricted) system matrix has numerical rank below its column count.
    #[error("rank-deficient system: detected rank {rank} of {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("support of size {size} exceeds the {rows} available measurements")]
    SupportOverflow { size: usize, rows: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
