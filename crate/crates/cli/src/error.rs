//! Command failures and their exit codes.

use adverse_core::correctness::QueryError;
use thiserror::Error;

use crate::dsl::{ModelError, ResolutionError};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("resolution error: {0}")]
    Resolution(#[from] ResolutionError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Query(#[from] QueryError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Model(_) | CliError::Resolution(_) => EXIT_DATA,
            CliError::Io { .. } => EXIT_NO_INPUT,
            CliError::Query(QueryError::Unsupported(_)) => EXIT_USAGE,
            CliError::Query(QueryError::Regulation(_)) => EXIT_DATA,
            CliError::Query(QueryError::Check(_)) => EXIT_SOFTWARE,
        }
    }
}
