use std::path::PathBuf;

use mu_uncertainty::{Error, ErrorClass};
use thiserror::Error as ThisError;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_NONCONVERGENCE: u8 = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{}:{line}:{column}: {msg}", path.display())]
    Syntax {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },

    /// A library error traced back to the line of the offending key.
    #[error("{}:{line}: {source}", path.display())]
    Input {
        path: PathBuf,
        line: usize,
        source: Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { source, .. } | CliError::Lib(source) => match source.class() {
                ErrorClass::Validation => EXIT_VALIDATION,
                ErrorClass::Invariant => EXIT_INVARIANT,
                ErrorClass::NonConvergence => EXIT_NONCONVERGENCE,
            },
            CliError::Syntax { .. } | CliError::Io { .. } => EXIT_VALIDATION,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
