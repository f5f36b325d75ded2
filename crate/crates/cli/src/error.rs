use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Solver(#[from] sdre::Error),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0} selftest check(s) failed")]
    Selftest(usize),
}

impl CliError {
    /// Process exit status. Controlled divergence is not an error and exits 0.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 4,
            CliError::Selftest(_) => 5,
        }
    }
}

/// Errors that stem from the requested setup rather than from a solve.
pub(crate) fn classify(e: sdre::Error) -> CliError {
    use sdre::Error as E;
    match e {
        E::UnknownModel(_)
        | E::InvalidParams(_)
        | E::IndexOutOfRange(_)
        | E::StateDependentInput
        | E::MissingDecomposition => CliError::Config(e.to_string()),
        other => CliError::Solver(other),
    }
}
