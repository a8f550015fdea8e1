//! Experiment runner: configuration, orchestration and CSV artifacts.

pub mod app;
pub mod config;
pub mod experiment;

use std::path::PathBuf;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use experiment::{run_experiment, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: hypspin_core::Error,
    },

    #[error("stage `{stage}` failed on {}: {source}", path.display())]
    Io {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed: {message}")]
    Input { stage: &'static str, message: String },
}

impl CliError {
    /// 1 for configuration and usage errors, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Stage { .. } | CliError::Io { .. } | CliError::Input { .. } => 2,
        }
    }
}

/// Tags a core error with the stage it came from.
pub(crate) fn stage<T>(name: &'static str, r: hypspin_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Stage { stage: name, source })
}
