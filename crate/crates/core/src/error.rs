use thiserror::Error;

/// Errors raised by the solver modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GnError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Ellipticity lost: a zeroth-order or flux coefficient is not positive.
    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    /// The direct solve did not reproduce its right-hand side.
    #[error("elliptic solve failed: relative residual {residual:e} exceeds {tolerance:e}")]
    SolverFailure { residual: f64, tolerance: f64 },

    /// min φ_x fell below the monotonicity guard; φ left the diffeomorphism group.
    #[error("flow map lost monotonicity: min phi_x = {min_phix:e}")]
    MonotonicityLoss { min_phix: f64 },

    #[error("step rejected: {0}")]
    StepRejected(String),
}

pub type Result<T, E = GnError> = std::result::Result<T, E>;
