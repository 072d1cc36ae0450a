use macdmt::DmtError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Dmt(#[from] DmtError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("simulation unreliable: {0}")]
    Unreliable(String),
}

impl CliError {
    /// 0 success, 1 verification failure, 2 invalid config, 3 unreliable simulation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed(_) => 1,
            CliError::Config(_) | CliError::Dmt(_) => 2,
            CliError::Unreliable(_) => 3,
            CliError::Io { .. } | CliError::Json(_) | CliError::Csv(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
