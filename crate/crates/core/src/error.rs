use thiserror::Error;

/// Errors produced by the counting, exact and simulation layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A job was refused because its enumeration cost is above the configured budget.
    #[error("budget exceeded: {what} needs {cost} steps, limit is {limit}")]
    Budget { what: String, cost: u128, limit: u128 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("missing moment for word {0:?}")]
    MissingMoment(Vec<usize>),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
