use std::fmt;

use spinbridge::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad or incomplete input; exit code 2.
    Validation(String),
    /// A numerical diagnostic aborted the run; exit code 3.
    Numerical(String),
    /// Could not write outputs; exit code 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical abort: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpin(_)
            | Error::NonHermitian { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidParameter { .. }
            | Error::MissingSymbol
            | Error::OutsideGrid { .. } => CliError::Validation(e.to_string()),
            Error::QuadratureNotConverged { .. }
            | Error::ExponentCap { .. }
            | Error::RankDeficient { .. }
            | Error::StepSizeRejected { .. }
            | Error::EigenNotConverged { .. }
            | Error::NotPositiveDefinite { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
