use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by model construction, planning, learning and IO.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability row, reward, or parameter violates its declared range.
    #[error("invalid {what} at {index}: {reason}")]
    Invalid {
        what: &'static str,
        index: String,
        reason: String,
    },

    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    Dimension {
        what: &'static str,
        expected: String,
        actual: String,
    },

    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    /// Dual bisection ran out of iterations before the bracket closed.
    #[error(
        "bisection did not converge after {iterations} iterations; final bracket [{lo}, {hi}]"
    )]
    NonConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(
        what: &'static str,
        index: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Error::Invalid {
            what,
            index: index.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn dimension(
        what: &'static str,
        expected: impl ToString,
        actual: impl ToString,
    ) -> Self {
        Error::Dimension {
            what,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
