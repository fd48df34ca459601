use std::process::ExitCode;

use thiserror::Error;

/// Command failures, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("storage error: {0}")]
    Storage(String),
    #[error("{0}")]
    Other(String),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_CORPUS: u8 = 4;
pub const EXIT_PROVIDER: u8 = 5;
pub const EXIT_STORAGE: u8 = 6;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Corpus(_) => EXIT_CORPUS,
            CliError::Provider(_) => EXIT_PROVIDER,
            CliError::Storage(_) => EXIT_STORAGE,
            CliError::Other(_) => EXIT_OTHER,
        }
    }

    /// Provider and archive errors keep their own class; anything else is
    /// wrapped by `otherwise`.
    pub fn classify(e: hopgraph::Error, otherwise: fn(String) -> CliError) -> CliError {
        use hopgraph::Error as E;
        match e {
            E::Provider { .. } | E::Simulation { .. } | E::EmptyIndex { .. } => CliError::Provider(e.to_string()),
            E::Checksum { .. } | E::Version { .. } | E::Format(_) => CliError::Storage(e.to_string()),
            E::Dimension { .. } => CliError::Config(e.to_string()),
            other => otherwise(other.to_string()),
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

pub type CliResult<T> = Result<T, CliError>;
