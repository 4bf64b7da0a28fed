use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Field evaluated at (or numerically on top of) the dipole source.
    #[error("field singularity: evaluation point coincides with source at distance {distance:e} m")]
    Singularity { distance: f64 },

    /// An argument violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The fixed-point iteration blew up.
    #[error("equilibrium iteration diverged after {iterations} iterations (residual {residual:e} m)")]
    Divergence { iterations: usize, residual: f64 },

    /// Every cell of a calibration grid was infeasible.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// Ellipse fitting could not produce an ellipse.
    #[error("ellipse fit failed: {0}")]
    EllipseFit(String),

    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for failures caused by numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singularity { .. }
                | Error::Divergence { .. }
                | Error::Calibration(_)
                | Error::EllipseFit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
