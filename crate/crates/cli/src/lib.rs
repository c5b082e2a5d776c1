//! Command implementations behind the `nullcharge` binary.
//!
//! Every command parses and validates its whole configuration before doing
//! any work and returns its complete output as a string, so nothing is
//! written when validation fails.

pub mod commands;
pub mod config;
pub mod format;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("inadmissible initial state: {0}")]
    Inadmissible(String),
    #[error("radiation divergence: {0}")]
    Divergence(String),
    #[error("property check failed: {0}")]
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Quadrature(_) => 3,
            CliError::Inadmissible(_) => 4,
            CliError::Divergence(_) => 5,
            CliError::Property(_) => 6,
        }
    }
}

/// Output of a command. `failure` is set when the output is a valid partial
/// result that must still be written before exiting with an error.
#[derive(Debug)]
pub struct Output {
    pub body: String,
    pub summary: String,
    pub failure: Option<CliError>,
}

impl Output {
    fn ok(body: String, summary: String) -> Self {
        Output { body, summary, failure: None }
    }
}
