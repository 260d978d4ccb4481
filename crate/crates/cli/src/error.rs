use serde::Serialize;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Solver(String),
    #[error("oracle deviation {worst:e} exceeds tolerance {tolerance:e} (report written)")]
    Verification { worst: f64, tolerance: f64 },
}

/// Error record printed on stderr as one JSON line.
#[derive(Debug, Serialize)]
pub struct ErrorRecord<'a> {
    pub kind: &'a str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    /// 0 success, 1 validation, 2 I/O, 3 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Solver(_) | CliError::Verification { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "validation",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Solver(_) => "solver",
            CliError::Verification { .. } => "verification",
        }
    }

    pub fn to_json(&self) -> String {
        let record = ErrorRecord {
            kind: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        };
        serde_json::json!({ "error": record }).to_string()
    }
}
