use std::io;

/// Errors surfaced by graph construction, loaders, oracles, and algorithms.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed edge-list input. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parameter is outside its documented range or inconsistent with others.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The instance is too large for an exact routine.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The operation does not apply to this graph or model kind.
    #[error("model mismatch: {0}")]
    Model(String),

    /// A probe-session precondition was violated (e.g. probing a node twice).
    #[error("session error: {0}")]
    Session(String),

    /// A randomized selection loop ran out of attempts.
    #[error("exhausted: {0}")]
    Exhausted(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    pub(crate) fn parameter(message: impl Into<String>) -> Self {
        Error::Parameter(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
