use thiserror::Error;

use crate::solver::SolverResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The discriminant of the lambda formula is negative: no outgoing ray exists.
    #[error("evanescent ray: discriminant {discriminant:.3e} is not positive")]
    EvanescentRay { discriminant: f64 },

    #[error("vector ({0}, {1}, {2}) is not of unit length")]
    NotUnit(f64, f64, f64),

    #[error("incident direction does not strike the interface from medium I (x.nu = {0:.3e})")]
    BackfacingIncidence(f64),

    #[error("invalid media: {0}")]
    InvalidMedia(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("mass imbalance: source mass {source_mass:.9e}, target mass {target_mass:.9e} (relative error {relative:.3e})")]
    MassImbalance {
        source_mass: f64,
        target_mass: f64,
        relative: f64,
    },

    #[error("target cap with theta_max = {theta_max} rad reaches the equator")]
    DomainTouchesEquator { theta_max: f64 },

    #[error("solver did not converge: marginal error {marginal_error:.3e} after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        marginal_error: f64,
        partial: Box<SolverResult>,
    },

    #[error("source density vanishes on {fraction:.1}% of the domain nodes")]
    DegenerateDensity { fraction: f64 },

    #[error("gradient ({0:.4}, {1:.4}) leaves the target domain by more than one cell")]
    GradientOutOfRange(f64, f64),

    #[error("ray strikes ({0:.4}, {1:.4}) outside the phase grid footprint")]
    FootprintExceeded(f64, f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            Error::MassImbalance { .. } => 3,
            Error::NoConvergence { .. } => 4,
            Error::EvanescentRay { .. }
            | Error::GradientOutOfRange(..)
            | Error::FootprintExceeded(..)
            | Error::VerificationFailed(_) => 5,
            _ => 2,
        }
    }

    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
