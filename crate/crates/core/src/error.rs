use thiserror::Error;

/// Coarse classification of failures, stable across releases.
///
/// The CLI maps each kind to a distinct process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Domain,
    Cap,
    Budget,
    Alignment,
    Model,
    Degenerate,
    Numeric,
    Inconclusive,
    Io,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A Toeplitz position (or period) needed more construction steps than
    /// the configured `max_depth`.
    #[error("depth cap exceeded at index {index}: first undefined step is {step} (max_depth = {max_depth})")]
    Cap { index: i64, step: usize, max_depth: usize },

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: &'static str,
        needed: String,
        limit: u64,
    },

    #[error("window [{from}, {to}) is not aligned to blocks of length {block_len}")]
    Alignment { from: i64, to: i64, block_len: u64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numeric failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    /// A limit computation did not stabilize within its depth budget.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) => ErrorKind::Domain,
            Error::Cap { .. } => ErrorKind::Cap,
            Error::Budget { .. } => ErrorKind::Budget,
            Error::Alignment { .. } => ErrorKind::Alignment,
            Error::Model(_) => ErrorKind::Model,
            Error::Degenerate(_) => ErrorKind::Degenerate,
            Error::Numeric { .. } => ErrorKind::Numeric,
            Error::Inconclusive(_) => ErrorKind::Inconclusive,
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
