//! Library side of the `scramble` binary: config parsing, CSV output,
//! the verification suite and the subcommands.

pub mod commands;
pub mod config;
pub mod csv;
pub mod verify;

use thiserror::Error;

/// Failure classes, each with its own exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Invariant(_) => 2,
        }
    }
}
