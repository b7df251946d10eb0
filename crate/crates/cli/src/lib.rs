//! Command-line front end for the `aniso-kelvin` verification suites.

pub mod config;
pub mod render;
pub mod run;

use thiserror::Error;

pub use config::{parse_config, Format, ResolvedConfig, RunConfig, Settings, Suite};
pub use run::{execute, Document, Status, SuiteOutcome, SCHEMA};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] aniso_kelvin::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}
