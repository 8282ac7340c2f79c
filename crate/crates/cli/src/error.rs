use thiserror::Error;

use crate::spec::FAMILIES;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("malformed document at line {line}, column {column}: {reason}")]
    Malformed {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("unknown risk family {family:?}; supported: {}", FAMILIES.join(", "))]
    UnknownFamily { family: String },
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Certification(String),
    #[error("cannot write {path}: {reason}")]
    Output { path: String, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } => 2,
            CliError::NotConverged(_) => 3,
            CliError::Certification(_) => 4,
            CliError::Unreadable { .. } | CliError::Malformed { .. } => 5,
            CliError::UnknownFamily { .. } => 6,
            CliError::Output { .. } => 7,
        }
    }
}
