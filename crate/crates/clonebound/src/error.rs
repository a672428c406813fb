use clonebound_core::bounds::BoundsError;
use clonebound_core::numerics::NumericsError;
use clonebound_core::oracle::OracleError;
use clonebound_core::states::StatesError;

/// Exit code for invalid input.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) | Self::Io(_) => EXIT_INPUT,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        match e {
            NumericsError::NoConvergence { .. } => Self::Numerical(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

impl From<StatesError> for CliError {
    fn from(e: StatesError) -> Self {
        match e {
            StatesError::Numerics(n) => n.into(),
            other => Self::Input(other.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::States(s) => s.into(),
            BoundsError::Numerics(n) => Self::Numerical(n.to_string()),
            other => Self::Input(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Bounds(b) => b.into(),
            OracleError::Numerics(n) => Self::Numerical(n.to_string()),
            other => Self::Input(other.to_string()),
        }
    }
}
