use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} is not resolved by the grid: {cells:.3} cells, need at least {required}")]
    UnresolvableScale {
        what: &'static str,
        cells: f64,
        required: f64,
    },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("schedule exponents must satisfy 0 < delta1 < delta2 < 1 (got {delta1}, {delta2})")]
    InvalidDeltas { delta1: f64, delta2: f64 },
    #[error("concentration index must be at least 3 (got {0})")]
    InvalidIndex(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integrator failed to reach tolerance: {0}")]
    NonConvergence(String),
    #[error("sup norm {sup_norm:.6e} exceeded the blowup guard {guard:.6e} at t = {time}")]
    BlowupDetected { time: f64, sup_norm: f64, guard: f64 },
    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
    #[error("quadrature could not resolve oscillation at lambda = {lambda} within {panels} panels")]
    UnresolvedOscillation { lambda: f64, panels: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("bumps {first} and {second} overlap (margin {margin:.3e})")]
    OverlapDetected { first: usize, second: usize, margin: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
