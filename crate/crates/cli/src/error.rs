use filtra_core::error::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Core(e) => match e {
                CoreError::InvalidParameter(_)
                | CoreError::InvalidLevels(_)
                | CoreError::LevelOutOfWindow { .. }
                | CoreError::Parse(_)
                | CoreError::Unsupported(_)
                | CoreError::NotNormalized(_)
                | CoreError::NegativeWeight { .. }
                | CoreError::ProductCapExceeded { .. }
                | CoreError::TruncationTail { .. }
                | CoreError::DimensionMismatch(_)
                | CoreError::NotTotallyOrdered
                | CoreError::InvalidSpace(_)
                | CoreError::UnknownState(_) => 2,
                _ => 1,
            },
            CliError::Json(_) => 2,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

pub fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
