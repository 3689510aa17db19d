use thiserror::Error;

/// Errors produced by the embedding engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is out of range or refers to nothing.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A document (graph, slice template, solution file) could not be read.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A slice definition is internally inconsistent.
    #[error("inconsistent slice definition: {0}")]
    Specification(String),

    /// Committing an embedding would drive a capacity negative.
    #[error("cannot commit embedding: {0}")]
    Commit(String),

    /// An exhaustive search was refused because the instance is too large.
    #[error("instance too large: search space of {factor:.3e} exceeds bound {bound:.3e}")]
    SizeGuard { factor: f64, bound: f64 },

    /// A scenario specification cannot be run as given.
    #[error("invalid scenario: {0}")]
    Config(String),

    /// A solver produced output that failed re-validation; this is a bug.
    #[error("solver produced an invalid result: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
