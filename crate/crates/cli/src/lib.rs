//! Experiment front end: TOML configurations, bundled presets, and the
//! `run`, `certify`, `compare` and `transient` subcommands with their CSV
//! and JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use commands::{Overrides, Source};
pub use config::ExperimentConfig;
pub use error::CliError;
