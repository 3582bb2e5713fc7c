use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] fbdrift::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Model(_) => crate::EXIT_CONFIG,
            CliError::Io(_) => crate::EXIT_IO,
        }
    }
}

pub fn io_error(context: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", context.display()))
}
