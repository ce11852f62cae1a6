use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator, the learning loop and the file formats.
#[derive(Debug, Error)]
pub enum VneError {
    #[error("{kind} index {index} out of range (len {len})")]
    Index {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("state error: {0}")]
    State(String),

    #[error("no feasible candidate node")]
    NoCandidate,

    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("substrate generation failed: {0}")]
    Generation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl VneError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        VneError::Contract(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        VneError::State(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        VneError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VneError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = VneError> = std::result::Result<T, E>;
