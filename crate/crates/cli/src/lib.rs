//! Batch pipeline around `agm_core`: ingest, fit, generate, stats, compare
//! and a config-driven end-to-end bench run.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;

pub use app::{run, Cli};
pub use config::RunConfig;
pub use error::{exit, CliError, CliResult};
