use std::fmt;

use thiserror::Error;

use crate::lagrangian::State;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value while evaluating {what} at {state}")]
    Evaluation { what: &'static str, state: State },

    #[error("time {t} is outside the time domain {domain}")]
    OutsideDomain { t: f64, domain: String },

    #[error("time {t} is outside the trajectory span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("integration failed: {reason}; last good state {last}")]
    Integration { reason: String, last: State },

    #[error("integrand `{0}` was not registered on this trajectory")]
    NotRegistered(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}, q={:?}, qdot={:?})", self.t, self.q, self.qdot)
    }
}
