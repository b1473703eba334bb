//! Config-driven runner for the fockline experiments.
//!
//! ```text
//! fockline run <config.toml> [--output DIR] [--dump-state]
//! fockline validate <config.toml>
//! ```
//!
//! Exit codes: 0 success, 1 output could not be written, 2 config error,
//! 3 internal invariant breach.

pub mod config;
pub mod output;
pub mod runner;

use std::path::Path;

pub use config::{validate, ExperimentConfig, ExperimentKind, OutputFormat, RunPlan, Violation};
pub use runner::{run, RunError, RunOptions, RunReport, SCAN_HEADER};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    ExperimentConfig::from_toml(&text).map_err(|source| ConfigError::Parse {
        path: path.display().to_string(),
        source,
    })
}
