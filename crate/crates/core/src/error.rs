use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("data integrity error: {0}")]
    DataIntegrity(String),
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),
    #[error("roster mismatch: {0}")]
    RosterMismatch(String),
    #[error("empty roster: {0}")]
    EmptyRoster(String),
    #[error("insufficient edges: {needed} requested but only {available} positive-weight edges exist")]
    InsufficientEdges { needed: usize, available: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse error classes, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Parse,
    Statistics,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) => ErrorClass::Config,
            Error::Validation(_) | Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => {
                ErrorClass::Parse
            }
            Error::DataIntegrity(_)
            | Error::UndefinedStatistic(_)
            | Error::RosterMismatch(_)
            | Error::EmptyRoster(_)
            | Error::InsufficientEdges { .. } => ErrorClass::Statistics,
            Error::Io { .. } => ErrorClass::Io,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
