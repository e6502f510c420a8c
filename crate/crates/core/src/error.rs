use thiserror::Error;

/// Errors produced by the geometry, volume and spectrum routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("profile piece at r = {at} has no declared second derivative")]
    SecondDerivativeUnavailable { at: f64 },

    #[error("adaptive quadrature on [{a}, {b}] exhausted depth {max_depth} before tolerance")]
    QuadratureFailure { a: f64, b: f64, max_depth: usize },

    #[error("wrong volume regime: {0}")]
    WrongVolumeRegime(String),

    #[error("precision loss at r = {at}: {reason}")]
    PrecisionLoss { at: f64, reason: String },

    #[error("mesh failure: truncated eigenvalue rose from {previous} (R = {r_previous}) to {current} (R = {r_current})")]
    MeshFailure {
        r_previous: f64,
        previous: f64,
        r_current: f64,
        current: f64,
    },

    #[error("no oscillation found on the window for lambda up to {lambda_max}")]
    NoOscillationFound { lambda_max: f64 },

    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },
}

impl Error {
    /// Stable machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DomainError(_) => "DomainError",
            Error::SecondDerivativeUnavailable { .. } => "SecondDerivativeUnavailable",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::WrongVolumeRegime(_) => "WrongVolumeRegime",
            Error::PrecisionLoss { .. } => "PrecisionLoss",
            Error::MeshFailure { .. } => "MeshFailure",
            Error::NoOscillationFound { .. } => "NoOscillationFound",
            Error::Config { .. } => "ConfigError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
