use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Coordinate dimensions or sequence lengths do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// The requested configuration cannot be realized (e.g. `k > N`).
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A documented precondition of the operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The penalty increment `f(K) - f(K-1)` (or `f(K+1) - f(K)`) vanished.
    #[error("degenerate penalty: increment of f at K = {0} is zero")]
    DegeneratePenalty(usize),
    /// Every candidate of a selection criterion was excluded.
    #[error("no answer: {0}")]
    NoAnswer(String),
    /// Malformed input file content.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
