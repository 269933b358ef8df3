use thiserror::Error;

use sks_core::SksError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("all {0} ensemble members blew up")]
    BlowUp(usize),
    #[error(transparent)]
    Core(SksError),
    #[error("{0} validation checks failed")]
    Validation(usize),
}

impl From<SksError> for CliError {
    fn from(e: SksError) -> Self {
        match e {
            SksError::Config(m) => CliError::Config(m),
            SksError::EnsembleBlowUp(n) => CliError::BlowUp(n),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    /// 2 config, 3 full blow-up, 4 I/O, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::BlowUp(_) => 3,
            CliError::Io(_) => 4,
            CliError::Core(_) | CliError::Validation(_) => 1,
        }
    }
}
