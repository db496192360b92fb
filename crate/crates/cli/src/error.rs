use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("computation failed: {0}")]
    Computation(selberg_core::Error),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 1 validation, 2 computation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Computation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<selberg_core::Error> for CliError {
    fn from(e: selberg_core::Error) -> Self {
        use selberg_core::Error as E;
        match e {
            E::Io(err) => CliError::Io(err.to_string()),
            E::Format(msg) => CliError::Validation(format!("malformed input file: {msg}")),
            E::Validation(msg) => CliError::Validation(msg),
            E::Index { .. } => CliError::Validation(e.to_string()),
            other => CliError::Computation(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
