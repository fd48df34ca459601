use thiserror::Error;

use crate::providers::ProviderError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unknown vertex id `{0}`")]
    Key(String),

    #[error("vertex id `{0}` already exists in the graph")]
    IdConflict(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("provider failure for `{context}`: {source}")]
    Provider {
        context: String,
        #[source]
        source: ProviderError,
    },

    #[error("query simulation failed for passage `{passage_id}`: {reason}")]
    Simulation { passage_id: String, reason: String },

    #[error("indexing produced no vertices ({failures} passage(s) failed)")]
    EmptyIndex { failures: usize },

    #[error("archive checksum mismatch (expected {expected}, computed {actual})")]
    Checksum { expected: String, actual: String },

    #[error("unsupported archive version {found} (this build reads version {supported})")]
    Version { found: u16, supported: u16 },

    #[error("malformed archive: {0}")]
    Format(String),

    #[error("evaluation input error: {0}")]
    EvalInput(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn provider(context: impl Into<String>, source: ProviderError) -> Self {
        Error::Provider {
            context: context.into(),
            source,
        }
    }
}

impl From<ProviderError> for Error {
    fn from(source: ProviderError) -> Self {
        match source {
            ProviderError::Dimension { expected, found } => Error::Dimension { expected, found },
            other => Error::Provider {
                context: String::from("provider"),
                source: other,
            },
        }
    }
}
