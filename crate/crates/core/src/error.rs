//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Too few data points for the requested operation.
    #[error("need at least {min} values, got {got}")]
    TooShort { min: usize, got: usize },

    /// Evaluation point outside the spline's knot range.
    #[error("evaluation point {t} outside [0, {max}]")]
    OutOfDomain { t: f64, max: f64 },

    /// Vector/matrix sizes do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A matrix is not square where a square one is required.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// LU elimination hit a pivot below the singularity threshold.
    #[error("singular matrix at level {level}")]
    Singular { level: usize },

    /// Requested row is not correlated with the constant trend.
    #[error("row {j} is not correlated with the constant trend at level {level}")]
    NotCorrelated { j: usize, level: usize },

    /// No row of the matrix passed the trend-correlation tolerance.
    #[error("no row correlated with the constant trend at level {level}")]
    EmptyIndexSet { level: usize },

    /// Backtest lag does not leave any level to score.
    #[error("lag {lag} must satisfy 1 <= lag < n = {n}")]
    BadLag { lag: usize, n: usize },

    /// A non-finite value was found where a finite one is required.
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
}
