use std::path::PathBuf;

use qim_core::QimError;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("cannot parse plan: {0}")]
    PlanSyntax(#[from] toml::de::Error),
    #[error("no results to write")]
    EmptyResults,
    #[error("malformed results file {path}: {reason}")]
    MalformedResults { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] QimError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
