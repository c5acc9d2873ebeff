//! Scenario runner behind the `hotline` binary: parses a scenario, drives the
//! library, and writes CSV tables plus a JSON summary.

pub mod catalog;
pub mod output;
pub mod run;
pub mod scenario;

use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Schema(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Schema(m) => write!(f, "scenario error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hotline::Error> for CliError {
    fn from(e: hotline::Error) -> Self {
        use hotline::Error as E;
        let msg = e.to_string();
        match e {
            E::Io(_) => CliError::Io(msg),
            // inputs the library refuses: the scenario asked for something invalid
            E::Config(_)
            | E::Validation(_)
            | E::SingularFrame { .. }
            | E::Unsupported(_)
            | E::DimensionLimit { .. }
            | E::EnumerationLimit { .. }
            | E::Generation(_)
            | E::Parse(_) => CliError::Schema(msg),
            E::Truncation { .. } | E::Compile(_) | E::Integrator(_) | E::Solver(_) => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub const EXIT_CHECK_FAILED: u8 = 4;
