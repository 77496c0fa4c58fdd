use spininv_core::{BlochError, PulseIoError, SynthesisError, TwoSpinError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    TwoSpin(#[from] TwoSpinError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Io(#[from] PulseIoError),
}

impl CliError {
    /// 2 bad arguments, 3 numerical non-convergence, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Args(_) | CliError::TwoSpin(_) | CliError::Bloch(_) => 2,
            CliError::Io(PulseIoError::InvalidRequest(_)) => 2,
            CliError::Io(_) => 4,
            CliError::Synthesis(e) => match e {
                SynthesisError::NoConvergence { .. } | SynthesisError::OracleInfeasible { .. } => 3,
                SynthesisError::Pmp(_) | SynthesisError::Bloch(_) => 3,
                SynthesisError::InvalidConfig(_)
                | SynthesisError::OracleLimits(_)
                | SynthesisError::InvalidOffset(_)
                | SynthesisError::Ordering => 2,
            },
        }
    }
}
