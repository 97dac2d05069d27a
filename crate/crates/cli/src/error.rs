use std::path::PathBuf;

use silab_core::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("malformed value `{value}` for `{key}`: {reason}")]
    Malformed { key: String, value: String, reason: String },

    #[error("guard violated for `{key}`: {reason}")]
    Guard { key: String, reason: String },

    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Lab(#[from] LabError),
}

impl CliError {
    pub fn guard(key: &str, reason: impl Into<String>) -> CliError {
        CliError::Guard {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
