use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A nurse whose contract matches no pattern in the catalog.
    #[error("nurse {nurse} has an empty feasible set")]
    InfeasibleNurse { nurse: u32 },

    /// A schedule assigns a nurse a pattern outside her feasible set.
    #[error("nurse {nurse} is assigned pattern {pattern}, which is not in her feasible set")]
    ContractViolation { nurse: u32, pattern: u32 },

    #[error("parse error at {path}: {detail}")]
    Parse { path: String, detail: String },

    #[error("instance failed validation:\n{report}")]
    InvalidInstance { report: String },

    /// Brute-force search space larger than the configured limit.
    #[error("search space of {space} states exceeds the limit of {limit}")]
    Capacity { space: u128, limit: u64 },

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn parse(path: impl Into<String>, detail: impl std::fmt::Display) -> Self {
        Error::Parse {
            path: path.into(),
            detail: detail.to_string(),
        }
    }

    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
