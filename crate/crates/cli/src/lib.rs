//! Library half of the `sis-atoms` command-line tool: model files, input
//! parsing and the reports printed by each command.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;

pub use commands::Report;
pub use error::{CliError, CliResult};
