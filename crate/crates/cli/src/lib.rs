//! Experiment runner for `dykstra-core`: JSON configs, built-in scenarios,
//! artifact writers and the rate calculator behind the `dykstra` binary.

pub mod config;
pub mod error;
pub mod query;
pub mod report;
pub mod run;
pub mod scenarios;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use run::{run, run_batch, Reports, RunOutcome};
pub use scenarios::{scenario, SCENARIOS};

/// Environment variable naming the artifact root.
pub const OUT_ENV: &str = "DYKSTRA_OUT";
