use thiserror::Error;

/// Errors reported by the library.
///
/// The variants distinguish between problems with the shape of the data
/// (caller bugs), inputs that leave the domain where the truncated model is
/// exact, and genuine numerical failures inside a solver.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix or series dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A parameter is outside its documented domain (letter out of range,
    /// radius outside `[0, 1]`, empty alphabet, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A constant term that must be invertible (or equal to the identity)
    /// is not, so a series inverse or Cayley transform cannot be formed.
    #[error("singular or non-normalized constant term: {0}")]
    ConstantTerm(String),

    /// The requested evaluation is not covered by the truncation guarantees,
    /// e.g. evaluating a series at a non-nilpotent tuple with row norm >= 1.
    #[error("outside the truncation-sound domain: {0}")]
    TruncationUnsound(String),

    /// Input data violates a structural hypothesis (positivity block test,
    /// intertwining relations, membership in a unit ball, ...).
    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    /// A numerical routine failed (singular solve, eigensolver breakdown).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
