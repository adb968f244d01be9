use std::path::Path;

use thiserror::Error;

/// Process exit status for a failed command.
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

pub type CliResult<T> = Result<T, CliError>;

/// A command failure, split by whether the input was at fault.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input files; nothing was computed.
    #[error("{code}: {message}")]
    Validation { code: String, message: String },
    /// The inputs were acceptable but the computation or output failed.
    #[error("{code}: {message}")]
    Runtime { code: String, message: String },
}

impl CliError {
    pub fn validation(code: &str, message: impl Into<String>) -> Self {
        CliError::Validation {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn runtime(code: &str, message: impl Into<String>) -> Self {
        CliError::Runtime {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => EXIT_VALIDATION,
            CliError::Runtime { .. } => EXIT_RUNTIME,
        }
    }

    /// Reading an input failed: the file is missing or unreadable.
    pub fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::validation("cli::ReadFailed", format!("{}: {e}", path.display()))
    }

    /// Writing an output failed.
    pub fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::runtime("cli::WriteFailed", format!("{}: {e}", path.display()))
    }
}

impl From<lfa_core::Error> for CliError {
    fn from(e: lfa_core::Error) -> Self {
        if e.is_validation() {
            CliError::validation(e.code(), e.to_string())
        } else {
            CliError::runtime(e.code(), e.to_string())
        }
    }
}
