use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The inputs were read but do not pass a check. Exit status 1.
    #[error("{message}")]
    Invalid { kind: &'static str, message: String },
    /// An input could not be read or parsed. Exit status 2.
    #[error("{message}")]
    Format { kind: &'static str, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn invalid(kind: &'static str, message: impl ToString) -> Self {
        CliError::Invalid {
            kind,
            message: message.to_string(),
        }
    }

    pub fn format(kind: &'static str, message: impl ToString) -> Self {
        CliError::Format {
            kind,
            message: message.to_string(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } => 1,
            CliError::Format { .. } | CliError::Io { .. } => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Invalid { kind, .. } | CliError::Format { kind, .. } => kind,
            CliError::Io { .. } => "io",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"kind": self.kind(), "message": self.to_string(), "exit": self.exit_code()}})
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
