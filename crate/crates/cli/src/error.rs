use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("bound violated: {0}")]
    Theorem(String),
    #[error("{0}")]
    Ceiling(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn invalid(key: &str, why: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("invalid `{key}`: {why}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Theorem(_) => 3,
            CliError::Ceiling(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<varlen::Error> for CliError {
    fn from(e: varlen::Error) -> Self {
        match e {
            varlen::Error::CeilingExceeded { .. } => CliError::Ceiling(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
