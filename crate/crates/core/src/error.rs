use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value breaks an invariant. `path` names the offending field, e.g. `bsses[2].id`.
    #[error("invalid {path}: {message}")]
    Validation { path: String, message: String },

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// Learner state used out of protocol order (e.g. a reward without a pending action).
    #[error("bandit protocol violation: {0}")]
    Protocol(String),
}

impl Error {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input (configuration, schema, invariants)
    /// rather than by the runtime environment.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Parse { .. })
    }
}

/// Fails with a validation error at `path` unless `cond` holds.
pub(crate) fn ensure(cond: bool, path: impl Into<String>, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::validation(path, message))
    }
}
