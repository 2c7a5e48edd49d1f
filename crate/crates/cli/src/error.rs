use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] induction_sbp::Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    #[error("stability bound violated: {0}")]
    Bound(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
            CliError::Bound(_) => 4,
        }
    }
}
