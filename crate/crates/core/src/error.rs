//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integration step underflow at t = {t:.6e} ({context})")]
    StepUnderflow { t: f64, context: String },

    #[error("step limit exceeded at t = {t:.6e} ({context})")]
    StepLimit { t: f64, context: String },

    #[error("matrix inversion failed in {context}: condition number {cond:.3e} exceeds {limit:.1e}")]
    SingularMatrix { cond: f64, limit: f64, context: String },

    #[error("riccati solution blew up at t = {t:.6}")]
    RiccatiBlowup { t: f64 },

    #[error("shooting did not converge after {iters} iterations (miss = {miss:.3e})")]
    ShootingFailed { iters: usize, miss: f64 },

    #[error("limit unconverged: {0}")]
    Unconverged(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("profile domain exceeded: requested t = {t:.3}, domain [{lo:.3}, {hi:.3}]")]
    DomainExceeded { t: f64, lo: f64, hi: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
