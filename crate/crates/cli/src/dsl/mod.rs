//! The textual model language.

pub mod ast;
pub mod compile;
pub mod parse;

use thiserror::Error;

pub use ast::ModelFile;
pub use compile::{compile, Model, ResolutionError};
pub use parse::{parse_model, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("resolution error: {0}")]
    Resolution(#[from] ResolutionError),
}

/// Parses and compiles a model file.
pub fn load_model(text: &str) -> Result<Model, ModelError> {
    let file = parse_model(text)?;
    Ok(compile(&file)?)
}
