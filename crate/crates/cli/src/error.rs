use std::process::ExitCode;

use thiserror::Error;

/// Failures grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config file, flag or input data.
    #[error("config error: {0}")]
    Config(String),

    #[error("convergence error: {0}")]
    Convergence(String),

    #[error("i/o error: {0}")]
    Io(String),

    /// Any other numerical failure.
    #[error("numerical error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io(_) => 4,
            CliError::Numeric(_) => 5,
        })
    }
}

impl From<ergodic_tt::Error> for CliError {
    fn from(e: ergodic_tt::Error) -> Self {
        use ergodic_tt::Error as E;
        let msg = e.to_string();
        match e {
            E::Convergence { .. } => CliError::Convergence(msg),
            E::Io(_) => CliError::Io(msg),
            E::Argument(_) | E::Parse { .. } | E::Validation { .. } | E::UnsupportedDimension(_) | E::Domain(_) | E::Shape(_) => {
                CliError::Config(msg)
            }
            E::Bounds(_) | E::Size(_) => CliError::Numeric(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
