use std::path::PathBuf;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] ea_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Parse(String),
    #[error("config: unknown key `{0}`")]
    UnknownKey(String),
    #[error("cannot aggregate an empty sample")]
    EmptyAggregation,
    #[error("{path}, line {line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl LabError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
