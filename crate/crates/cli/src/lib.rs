//! Batch runner behind the `bell-lab` binary.
//!
//! A run reads a JSON experiment config, validates it, executes the
//! experiment and renders a versioned report as JSON or CSV.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind, Format, Overrides, Plan};
pub use report::Report;
pub use run::{execute, run_command, run_config, RunError};
