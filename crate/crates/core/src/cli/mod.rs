//! Command-line front end: experiment configs, dispatch and output.

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, OutputFormat};
pub use run::{exit_code, run_experiment, RunOutput};
