//! Experiment front end for the wiretap authentication model: configuration,
//! parallel drivers for every experiment, and the result files.
//!
//! All randomness comes from the run's master seed through
//! [`wiretap_auth_core::rng::SeedTree`]; a trial's streams depend only on the
//! experiment, the ladder point and the trial index, so output is identical
//! for every thread count.

pub mod commands;
pub mod config;
pub mod formats;

use std::fmt;

use wiretap_auth_core::Error as CoreError;

/// Why a run did not complete. Maps to the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// The experiment ran into an error (exit 1).
    Experiment(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Experiment(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Experiment(m) => write!(f, "experiment failed: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. }
            | CoreError::AlphabetMismatch { .. }
            | CoreError::InvalidDistribution(_)
            | CoreError::UnsupportedField(_) => Failure::Config(e.to_string()),
            _ => Failure::Experiment(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Experiment(format!("i/o: {e}"))
    }
}

pub use commands::{run, Command, RunOptions, RunSummary};
pub use config::ExperimentConfig;
