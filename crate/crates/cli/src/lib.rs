//! File formats, configuration and commands of the `lfa` tool.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use error::{CliError, CliResult};
