//! Batch front end: config parsing, subcommands and artifact writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::RunConfig;
pub use error::{CliError, Result};
