//! Experiment harness for `slicer-core`: JSON scenario files, the
//! environment-suite generator, model checkpoints, CSV/JSON artifacts, run
//! manifests and a rayon-backed executor. The `slicer` binary wraps the
//! runners in [`runs`].

pub mod artifacts;
pub mod checkpoint;
pub mod config;
pub mod exec;
pub mod runs;
pub mod suite;

use std::path::PathBuf;

pub use config::{load_config, parse_config, Profile, ScenarioConfig};
pub use exec::Rayon;

/// Errors raised by the harness.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] slicer_core::Error),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("manifest: {0}")]
    Manifest(String),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Key path of a configuration error, if this is one.
    pub fn config_key(&self) -> Option<&str> {
        match self {
            HarnessError::Config { key, .. } => Some(key),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
