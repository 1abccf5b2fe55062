//! Lagrangian systems, variation fields, and the nonlocal constant evaluator.
//!
//! A family of perturbed motions `q_λ(t)` enters only through its first
//! variation `δq = ∂_λ q_λ |_{λ=0}` and the time derivative `δq̇`. Along any
//! solution of the Euler-Lagrange equation,
//!
//! ```text
//! C(t) = ∂L/∂q̇ · δq  −  ∫_{t0}^{t} (∂L/∂q · δq + ∂L/∂q̇ · δq̇) ds
//! ```
//!
//! is constant. [`momentum`] and [`integrand_m`] compute the two pieces,
//! and [`nonlocal_constant`] assembles them along an integrated trajectory.

mod constant;
mod family;

pub use constant::{action, nonlocal_constant, NonlocalConstantSeries};
pub use family::{JetFn, VariationField, Warp};

use std::fmt;

use crate::autodiff::{grad_q, grad_qdot, Scalar};
use crate::error::{Error, Result};

/// Open time interval on which a system is defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeDomain {
    pub lower: f64,
    pub upper: f64,
}

impl TimeDomain {
    pub const ALL: TimeDomain = TimeDomain {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub const POSITIVE: TimeDomain = TimeDomain {
        lower: 0.0,
        upper: f64::INFINITY,
    };

    pub fn contains(&self, t: f64) -> bool {
        t > self.lower && t < self.upper
    }
}

impl fmt::Display for TimeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lower, self.upper)
    }
}

/// A Lagrangian ODE system `d/dt ∂L/∂q̇ − ∂L/∂q = 0`.
///
/// `lagrangian` is generic over [`Scalar`] so that the same expression is
/// used for plain evaluation and for forward-mode gradients. `accel` must be
/// the Euler-Lagrange equation solved for `q̈`.
pub trait Lagrangian {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn lagrangian<S: Scalar>(&self, t: S, q: &[S], qdot: &[S]) -> S;

    fn accel(&self, t: f64, q: &[f64], qdot: &[f64], out: &mut [f64]);

    fn time_domain(&self) -> TimeDomain {
        TimeDomain::ALL
    }
}

/// Position and velocity at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl State {
    pub fn new(t: f64, q: Vec<f64>, qdot: Vec<f64>) -> Self {
        Self { t, q, qdot }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Euclidean norm of the phase-space point `(q, qdot)`.
    pub fn phase_norm(&self) -> f64 {
        self.q
            .iter()
            .chain(&self.qdot)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

pub(crate) fn check_state<L: Lagrangian + ?Sized>(system: &L, state: &State) -> Result<()> {
    let n = system.dim();
    if state.q.len() != n || state.qdot.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: state.q.len().max(state.qdot.len()),
        });
    }
    let domain = system.time_domain();
    if !domain.contains(state.t) {
        return Err(Error::OutsideDomain {
            t: state.t,
            domain: domain.to_string(),
        });
    }
    Ok(())
}

/// Value of the Lagrangian at a state.
pub fn lagrangian_value<L: Lagrangian + ?Sized>(system: &L, state: &State) -> Result<f64> {
    let l = system.lagrangian(state.t, &state.q, &state.qdot);
    if l.is_finite() {
        Ok(l)
    } else {
        Err(Error::Evaluation {
            what: "Lagrangian",
            state: state.clone(),
        })
    }
}

/// Acceleration from the Euler-Lagrange equation.
pub fn acceleration<L: Lagrangian + ?Sized>(system: &L, state: &State) -> Vec<f64> {
    let mut out = vec![0.0; system.dim()];
    system.accel(state.t, &state.q, &state.qdot, &mut out);
    out
}

/// Conjugate momentum `∂L/∂q̇`.
pub fn momentum<L: Lagrangian + ?Sized>(system: &L, state: &State) -> Result<Vec<f64>> {
    check_state(system, state)?;
    grad_qdot(system, state.t, &state.q, &state.qdot)
}

/// `∂_λ L(t, q_λ, q̇_λ)|_{λ=0} = ∂L/∂q · δq + ∂L/∂q̇ · δq̇`.
///
/// `qddot` must be the acceleration at `state`; constructor-built fields use
/// it to express `δq̇` without differentiating numerically.
pub fn integrand_m<L: Lagrangian + ?Sized>(
    system: &L,
    field: &VariationField,
    state: &State,
    qddot: &[f64],
) -> Result<f64> {
    check_state(system, state)?;
    integrand_unchecked(system, field, state.t, &state.q, &state.qdot, qddot)
}

pub(crate) fn integrand_unchecked<L: Lagrangian + ?Sized>(
    system: &L,
    field: &VariationField,
    t: f64,
    q: &[f64],
    qdot: &[f64],
    qddot: &[f64],
) -> Result<f64> {
    if field.is_null() {
        return Ok(0.0);
    }
    let n = q.len();
    let mut dq = vec![0.0; n];
    let mut dqdot = vec![0.0; n];
    field.jet(t, q, qdot, qddot, &mut dq, &mut dqdot);
    let gq = grad_q(system, t, q, qdot)?;
    let gv = grad_qdot(system, t, q, qdot)?;
    let m = f64::dot(&gq, &dq) + f64::dot(&gv, &dqdot);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Evaluation {
            what: "variation integrand",
            state: State::new(t, q.to_vec(), qdot.to_vec()),
        })
    }
}

/// Boundary term `∂L/∂q̇ · δq`.
pub fn boundary_term<L: Lagrangian + ?Sized>(
    system: &L,
    field: &VariationField,
    state: &State,
    qddot: &[f64],
) -> Result<f64> {
    if field.is_null() {
        return Ok(0.0);
    }
    let p = momentum(system, state)?;
    let n = state.dim();
    let mut dq = vec![0.0; n];
    let mut dqdot = vec![0.0; n];
    field.jet(state.t, &state.q, &state.qdot, qddot, &mut dq, &mut dqdot);
    Ok(f64::dot(&p, &dq))
}

/// Euler-Lagrange residual `d/dt ∂L/∂q̇ − ∂L/∂q` with `q̈ := accel`.
///
/// The total time derivative is a fourth-order central difference of the
/// autodiff momentum along the tangent `(1, q̇, q̈)`.
pub fn euler_lagrange_residual<L: Lagrangian + ?Sized>(
    system: &L,
    state: &State,
) -> Result<Vec<f64>> {
    check_state(system, state)?;
    let qddot = acceleration(system, state);
    let h = 1e-4 * state.t.abs().max(1.0);
    let p_at = |tau: f64| {
        let q: Vec<f64> = state
            .q
            .iter()
            .zip(&state.qdot)
            .zip(&qddot)
            .map(|((q, v), a)| q + tau * v + 0.5 * tau * tau * a)
            .collect();
        let v: Vec<f64> = state
            .qdot
            .iter()
            .zip(&qddot)
            .map(|(v, a)| v + tau * a)
            .collect();
        grad_qdot(system, state.t + tau, &q, &v)
    };
    let p2 = p_at(2.0 * h)?;
    let p1 = p_at(h)?;
    let m1 = p_at(-h)?;
    let m2 = p_at(-2.0 * h)?;
    let gq = grad_q(system, state.t, &state.q, &state.qdot)?;
    Ok((0..state.dim())
        .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h) - gq[i])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Dissipative, LaneEmden, MaxwellBloch, Potential};

    #[test]
    fn dissipative_free_momentum() {
        let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
        let p = momentum(&sys, &State::new(0.0, vec![0.0], vec![2.0])).unwrap();
        assert_eq!(p, vec![2.0]);
    }

    #[test]
    fn maxwell_bloch_momentum() {
        let p = momentum(
            &MaxwellBloch,
            &State::new(0.0, vec![1.0, 3.0, 0.0], vec![3.0, -1.0, -1.0]),
        )
        .unwrap();
        assert_eq!(p, vec![3.0, -1.0, 4.0]);
    }

    #[test]
    fn lane_emden_momentum_at_rest() {
        let le = LaneEmden::new(5).unwrap();
        let p = momentum(&le, &State::new(2.0, vec![1.0], vec![0.0])).unwrap();
        assert_eq!(p, vec![0.0]);
    }

    #[test]
    fn momentum_rejects_time_outside_domain() {
        let le = LaneEmden::new(5).unwrap();
        let err = momentum(&le, &State::new(-1.0, vec![1.0], vec![0.0])).unwrap_err();
        assert!(matches!(err, Error::OutsideDomain { .. }));
    }

    #[test]
    fn non_finite_lagrangian_is_an_evaluation_error() {
        let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
        let err = momentum(&sys, &State::new(1e6, vec![0.0], vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }), "{err}");
    }

    #[test]
    fn dissipative_integrand_vanishes_for_matched_rate() {
        // a = k and U = 0 make q̇·((a−k)q̇ − 2∇U) vanish identically
        let k = 1.0;
        let sys = Dissipative::new(1, k, Potential::Zero).unwrap();
        let field = VariationField::time_shift(Warp::Exp { rate: k });
        let state = State::new(0.0, vec![0.0], vec![1.0]);
        let qddot = acceleration(&sys, &state);
        let m = integrand_m(&sys, &field, &state, &qddot).unwrap();
        assert!(m.abs() < 1e-15, "{m}");
    }

    #[test]
    fn maxwell_bloch_scaling_integrand_is_two_e_minus_three_qdot3_sq() {
        let field = VariationField::scaling(vec![1.0, 1.0, -2.0], 0.0);
        for (q, v) in [
            ([1.0, 3.0, 0.2], [3.0, -1.0, -1.0]),
            ([0.4, -1.1, 2.0], [0.7, 0.3, 1.5]),
        ] {
            let state = State::new(0.3, q.to_vec(), v.to_vec());
            let qddot = acceleration(&MaxwellBloch, &state);
            let m = integrand_m(&MaxwellBloch, &field, &state, &qddot).unwrap();
            let e = 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            assert!((m - (2.0 * e - 3.0 * v[2] * v[2])).abs() < 1e-13);
        }
    }

    #[test]
    fn lane_emden_second_family_integrand_at_rest() {
        let le = LaneEmden::new(3).unwrap();
        let field = VariationField::time_shift(Warp::Power {
            coeff: 1.0,
            exponent: 2.0,
        });
        let state = State::new(1.5, vec![0.8], vec![0.0]);
        let qddot = acceleration(&le, &state);
        assert_eq!(integrand_m(&le, &field, &state, &qddot).unwrap(), 0.0);
    }

    #[test]
    fn euler_lagrange_residual_is_small_for_builtins() {
        let le = LaneEmden::new(5).unwrap();
        let r = euler_lagrange_residual(&le, &State::new(1.3, vec![0.7], vec![-0.4])).unwrap();
        assert!(r[0].abs() < 1e-8, "{r:?}");
        let r = euler_lagrange_residual(
            &MaxwellBloch,
            &State::new(0.0, vec![1.0, -0.5, 0.3], vec![0.2, 0.9, -1.1]),
        )
        .unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-8), "{r:?}");
    }
}
