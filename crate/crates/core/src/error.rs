use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two grid functions (or a grid function and an operator) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// An argument lies outside the operation's domain (negative time, empty set, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A request cannot be realized exactly on the discretization (e.g. a
    /// translation that is not a whole number of grid steps).
    #[error("precision error: {0}")]
    Precision(String),
    /// The operation is not available for this operator kind.
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("index out of range: {0}")]
    Index(String),
    /// The sampler/basis cross-Gram matrix has no left inverse.
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("invalid value: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
