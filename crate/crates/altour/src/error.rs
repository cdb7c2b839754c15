use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: cannot parse {field} value {value:?}")]
    Parse { row: u64, field: &'static str, value: String },
    #[error("malformed dataset: {0}")]
    Dataset(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("external solver protocol error: {0}")]
    Protocol(String),
    #[error("external solver failed: {0}")]
    External(String),
    #[error("no connected solution after {rounds} rounds ({cuts} cuts added)")]
    NonConvergence { rounds: usize, cuts: usize },
    #[error("check failed: {0}")]
    Check(String),
    #[error("unknown experiment {0}")]
    UnknownExperiment(u64),
    #[error(transparent)]
    Core(#[from] altour_core::Error),
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit status: 2 infeasible, 3 timeout without a solution,
    /// 4 I/O or schema problems, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(altour_core::Error::Infeasible) => 2,
            Self::Core(altour_core::Error::TimeoutWithoutSolution) => 3,
            Self::Io { .. }
            | Self::Parse { .. }
            | Self::Dataset(_)
            | Self::Schema(_)
            | Self::Csv(_)
            | Self::UnknownExperiment(_) => 4,
            _ => 1,
        }
    }
}
