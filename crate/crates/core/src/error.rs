use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this input shape (e.g. a divergent tail).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A documented precondition of a construction does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("truncation {requested} too small; the smallest admissible truncation is {minimal}")]
    TruncationTooSmall { requested: usize, minimal: usize },

    #[error("witness is not feasible: {0}")]
    InfeasibleWitness(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
