use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Cholesky factorization failed after jitter {max_jitter:e}")]
    CholeskyFailed { max_jitter: f64 },

    #[error("operation requires at least one observation")]
    EmptyDataset,

    #[error("mixture quantile bisection did not converge for u = {0}")]
    BisectionFailed(f64),

    #[error("all {0} optimization restarts failed")]
    AllRestartsFailed(usize),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("task `{0}` has no known optimum")]
    UnknownOptimum(String),

    #[error("metric column `{0}` not found")]
    MissingMetric(String),

    #[error("no result CSV files found under {0}")]
    NoResults(String),

    #[error("plotting failed: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
