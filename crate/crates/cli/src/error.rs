use std::io;
use std::path::Path;

use bpetk::PropernessReport;
use thiserror::Error;

use crate::dictfile::ParseError;

/// Every failure a command can end with, each mapped to a fixed exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed dictionary, input or arguments.
    #[error("{0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },

    #[error("dictionary is not proper:{}", list_violations(.0))]
    Improper(PropernessReport),

    #[error("{0}")]
    LookaheadTooSmall(String),

    /// A checked property failed.
    #[error("{0}")]
    Violation(String),

    /// The command already reported its outcome; only the exit code remains.
    #[error("")]
    Reported(u8),
}

fn list_violations(report: &PropernessReport) -> String {
    report
        .violations
        .iter()
        .map(|v| format!("\n  {v}"))
        .collect()
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Improper(_) => 4,
            CliError::LookaheadTooSmall(_) => 5,
            CliError::Reported(code) => *code,
        }
    }

    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn dictionary(path: impl AsRef<Path>, error: ParseError) -> Self {
        CliError::Parse(format!("{}: {error}", path.as_ref().display()))
    }
}

impl From<bpetk::Error> for CliError {
    fn from(error: bpetk::Error) -> Self {
        match error {
            bpetk::Error::ImproperDictionary(report) => CliError::Improper(report),
            e @ bpetk::Error::LookaheadTooSmall { .. } => {
                CliError::LookaheadTooSmall(e.to_string())
            }
            e => CliError::Parse(e.to_string()),
        }
    }
}
