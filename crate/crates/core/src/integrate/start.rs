use crate::error::{Error, Result};
use crate::lagrangian::State;

/// Regular Lane-Emden start `q(0) = q0, q̇(0) = 0` advanced to `t = epsilon`
/// by the Taylor series
/// `q = q0 − q0^n t²/6 + n q0^{2n−1} t⁴/120`.
///
/// The equation is singular at the centre, so integration starts here.
pub fn lane_emden_series_start(n: u32, q0: f64, epsilon: f64) -> Result<State> {
    if !(q0 > 0.0) {
        return Err(Error::Domain(format!(
            "series start needs q0 > 0, got {q0}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "series start needs epsilon > 0, got {epsilon}"
        )));
    }
    let n_i = n as i32;
    let a = q0.powi(n_i);
    let b = n as f64 * q0.powi(2 * n_i - 1);
    let t = epsilon;
    let q = q0 - a * t * t / 6.0 + b * t.powi(4) / 120.0;
    let qdot = -a * t / 3.0 + b * t.powi(3) / 30.0;
    Ok(State::new(t, vec![q], vec![qdot]))
}

pub const DEFAULT_SERIES_EPSILON: f64 = 1e-4;
