use thiserror::Error;

/// Failures of a campaign, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config line {line}: {detail}")]
    Config { line: usize, detail: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Core(#[from] bcmrt::Error),

    #[error("input line {line}: {detail}")]
    Input { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for usage and parameter errors, 3 for sizes beyond a feasible cap,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::Core(e) => match e {
                bcmrt::Error::Infeasible { .. } => 3,
                bcmrt::Error::Parameter { .. } | bcmrt::Error::TooSmall(_) | bcmrt::Error::Setting { .. } => 2,
                _ => 1,
            },
            _ => 1,
        }
    }
}
