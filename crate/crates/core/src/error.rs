use thiserror::Error;

/// Errors raised by the solution, verification and transformation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("overflow evaluating {function} at z = {z}")]
    Overflow { function: &'static str, z: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("internal consistency check failed for `{relation}`: defect {defect:e}")]
    InternalConsistency { relation: &'static str, defect: f64 },

    #[error("integration produced a non-finite state at {at}")]
    IntegrationFailure { at: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracketing { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations (last |f| = {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
