//! CLI error categories and their exit codes.

use std::fmt;

use splinecast::Error as CoreError;

/// Exit codes: 0 success, 1 I/O, 2 config, 3 ingestion, 4 numerical.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Ingestion(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Ingestion(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Config(_) => "config",
            CliError::Ingestion(_) => "ingestion",
            CliError::Numerical(_) => "singularity",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (label, message) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Ingestion(m) => ("ingestion", m),
            CliError::Numerical(m) => ("singularity", m),
            CliError::Io(m) => ("io", m),
        };
        write!(f, "[{label}] {message}")
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Singular { .. } | CoreError::EmptyIndexSet { .. } => {
                CliError::Numerical(err.to_string())
            }
            CoreError::BadLag { .. } => CliError::Config(err.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}
