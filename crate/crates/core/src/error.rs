use thiserror::Error;

/// Errors produced while loading, estimating or evaluating.
#[derive(Debug, Error)]
pub enum PrmError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Estimation(String),

    #[error("{0}")]
    Metric(String),

    #[error("{0}")]
    Analysis(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PrmError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        PrmError::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        PrmError::Validation(message.into())
    }

    pub fn is_io(&self) -> bool {
        matches!(self, PrmError::Io(_))
    }
}

pub type Result<T, E = PrmError> = std::result::Result<T, E>;
