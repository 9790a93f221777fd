use std::path::PathBuf;

use mcfusion::FusionError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read config file {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("{action} {path}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read reference samples {path}: {message}")]
    Reference { path: PathBuf, message: String },
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn config_error<T>(message: impl Into<String>) -> Result<T> {
    Err(HarnessError::Config(message.into()))
}
