use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] b92_core::Error),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{0}")]
    Mismatch(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 for out-of-range values, 3 for inputs no channel or attack can
    /// satisfy, 4 for oracle disagreement, 1 for everything else.
    pub fn exit_code(&self) -> ExitCode {
        use b92_core::Error as E;
        let code = match self {
            CliError::Core(E::Domain { .. } | E::DegenerateAngle { .. }) => 2,
            CliError::Input(_) | CliError::Toml(_) => 2,
            CliError::Core(_) => 3,
            CliError::Mismatch(_) => 4,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 1,
        };
        ExitCode::from(code)
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}
