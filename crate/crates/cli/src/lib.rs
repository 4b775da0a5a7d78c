//! Experiment harness for the multipath estimator: scenario synthesis,
//! error-surface sweeps, single estimations and the MSE-vs-SNR benchmark,
//! all written as CSV.

pub mod commands;
pub mod config;
pub mod csvio;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("estimation failed: {0}")]
    Estimation(#[from] multipath_core::Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Estimation(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}
