use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A verification or hard assertion failed.
    #[error("{0}")]
    Failure(String),

    #[error(transparent)]
    Core(#[from] kellner_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for bad input, 2 for a failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Failure(_) | Self::Core(kellner_core::Error::Invariant(_)) => 2,
            _ => 1,
        }
    }
}
