use blowup_core::bounds::BoundsError;
use blowup_core::fbm::FbmError;
use blowup_core::model::ModelError;
use blowup_core::montecarlo::MonteCarloError;
use blowup_core::pde::PdeError;
use blowup_core::stable::StableError;
use thiserror::Error;

/// Failures mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or malformed config, violated hypotheses, I/O.
    #[error("{0}")]
    Config(String),
    /// The numerics could not deliver a trustworthy answer.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Numerical(_) => 2,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Config(format!("json: {e}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::Config(e.to_string())
    }
}

impl From<FbmError> for CliError {
    fn from(e: FbmError) -> Self {
        match e {
            FbmError::CholeskyFailure { .. } => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<StableError> for CliError {
    fn from(e: StableError) -> Self {
        match e {
            StableError::InvalidParameters(_)
            | StableError::UnsupportedDimension(_)
            | StableError::Cache(_) => Self::Config(e.to_string()),
            StableError::QuadratureNonConvergence { .. } | StableError::NonpositiveTime(_) => {
                Self::Numerical(e.to_string())
            }
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Stable(s) => s.into(),
            BoundsError::DivergentAtOrigin { .. }
            | BoundsError::InvalidInterval { .. }
            | BoundsError::NonpositiveTime(_)
            | BoundsError::NonpositiveMass { .. } => Self::Numerical(e.to_string()),
            // hypotheses of a bound that the configuration does not meet
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<MonteCarloError> for CliError {
    fn from(e: MonteCarloError) -> Self {
        match e {
            MonteCarloError::Fbm(e) => e.into(),
            MonteCarloError::Bounds(e) => e.into(),
            MonteCarloError::Stable(e) => e.into(),
            MonteCarloError::Model(e) => e.into(),
            MonteCarloError::AllPathsFailed { .. } => Self::Numerical(e.to_string()),
            MonteCarloError::InvalidConfig(_) | MonteCarloError::HypothesisViolated(_) => {
                Self::Config(e.to_string())
            }
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::Stable(e) => e.into(),
            PdeError::Bounds(e) => e.into(),
            PdeError::Model(e) => e.into(),
            _ => Self::Config(e.to_string()),
        }
    }
}
