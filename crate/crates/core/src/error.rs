use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid optical setup: {0}")]
    InvalidSetup(String),
    #[error("invalid regime thresholds: far {far} must be positive and below near {near}")]
    InvalidThresholds { far: f64, near: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("mode grid too small: n_max {n_max} < required {required}")]
    GridTooSmall { n_max: usize, required: usize },
    #[error("mode grid too large: {modes} modes exceeds the dense limit {limit}")]
    GridTooLarge { modes: usize, limit: usize },
    #[error("quadrature order {order} below the minimum {min}")]
    QuadratureOrder { order: usize, min: usize },
    #[error("quadrature did not converge: {0}")]
    QuadratureNonconvergence(String),
    #[error("passivity violated: transmissivity {value} exceeds 1 + {tolerance}")]
    PassivityViolation { value: f64, tolerance: f64 },
    #[error("singular value decomposition did not converge")]
    DecompositionFailure,
    #[error("root bracketing failed: {0}")]
    Nonconvergence(String),
    #[error("pupil {pupil} is not supported in {dimension}D")]
    UnsupportedPupil { pupil: &'static str, dimension: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
