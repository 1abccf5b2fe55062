use crate::error::{Error, Result};
use crate::integrate::Trajectory;

use super::{boundary_term, Lagrangian, VariationField};

/// `C(t) = N(t) − I(t)` sampled along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlocalConstantSeries {
    pub name: String,
    pub t0: f64,
    pub times: Vec<f64>,
    /// Boundary term `∂L/∂q̇ · δq`.
    pub boundary: Vec<f64>,
    /// `∫_{t0}^{t} M ds`.
    pub integral: Vec<f64>,
    pub value: Vec<f64>,
}

impl NonlocalConstantSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evaluates the nonlocal constant of `field` at `sample_times`.
///
/// The integral comes from the quadrature channel registered for `field`
/// when the trajectory was integrated, re-based so that `I(t0) = 0`.
pub fn nonlocal_constant<L: Lagrangian>(
    trajectory: &Trajectory<L>,
    field: &VariationField,
    t0: f64,
    sample_times: &[f64],
) -> Result<NonlocalConstantSeries> {
    let channel = trajectory
        .channel_of_family(field)
        .ok_or_else(|| Error::NotRegistered(field.descriptor()))?;
    let base = trajectory.accumulated(channel, t0)?;
    let n = sample_times.len();
    let mut out = NonlocalConstantSeries {
        name: field.descriptor(),
        t0,
        times: Vec::with_capacity(n),
        boundary: Vec::with_capacity(n),
        integral: Vec::with_capacity(n),
        value: Vec::with_capacity(n),
    };
    for &t in sample_times {
        let s = trajectory.eval(t)?;
        let nb = boundary_term(trajectory.system(), field, &s.state, &s.qddot)?;
        let i = if t == t0 { 0.0 } else { s.acc[channel] - base };
        out.times.push(t);
        out.boundary.push(nb);
        out.integral.push(i);
        out.value.push(nb - i);
    }
    Ok(out)
}

/// `∫_{t0}^{t1} L dt` from the trajectory's action channel.
pub fn action<L: Lagrangian>(trajectory: &Trajectory<L>, t0: f64, t1: f64) -> Result<f64> {
    let channel = trajectory
        .action_channel()
        .ok_or_else(|| Error::NotRegistered("action".into()))?;
    Ok(trajectory.accumulated(channel, t1)? - trajectory.accumulated(channel, t0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, uniform_times, Integrand, IntegratorConfig};
    use crate::lagrangian::{State, Warp};
    use crate::systems::{Dissipative, MaxwellBloch, Potential};

    #[test]
    fn matched_rate_constant_on_free_damped_particle() {
        let k = 1.0;
        let sys = Dissipative::new(1, k, Potential::Zero).unwrap();
        let field = VariationField::time_shift(Warp::Exp { rate: k });
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let tr = integrate(
            &sys,
            &init,
            3.0,
            &IntegratorConfig::default(),
            &[Integrand::Family(field.clone())],
        )
        .unwrap();
        let s = nonlocal_constant(&tr, &field, 0.0, tr.times()).unwrap();
        assert_eq!(s.integral[0], 0.0);
        for (i, &t) in s.times.iter().enumerate() {
            // N = e^{2kt} q̇², and q̇ = e^{−kt}
            assert!((s.value[i] - 1.0).abs() < 1e-8, "t={t}: {}", s.value[i]);
            let q = tr.node_state(i);
            assert!(((2.0 * k * t).exp() * q.qdot[0] * q.qdot[0] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn null_family_is_identically_zero() {
        let field = VariationField::null();
        let init = State::new(0.0, vec![1.0, 0.2, 0.0], vec![0.1, -0.4, 0.8]);
        let tr = integrate(
            &MaxwellBloch,
            &init,
            5.0,
            &IntegratorConfig::default(),
            &[Integrand::Family(field.clone())],
        )
        .unwrap();
        let s = nonlocal_constant(&tr, &field, 1.0, &uniform_times(0.0, 5.0, 31)).unwrap();
        assert!(s
            .value
            .iter()
            .chain(&s.boundary)
            .chain(&s.integral)
            .all(|&x| x == 0.0));
    }

    #[test]
    fn unregistered_family_is_an_error() {
        let init = State::new(0.0, vec![1.0, 0.2, 0.0], vec![0.1, -0.4, 0.8]);
        let tr = integrate(&MaxwellBloch, &init, 1.0, &IntegratorConfig::default(), &[]).unwrap();
        let field = VariationField::scaling(vec![1.0, 1.0, -2.0], 0.0);
        assert!(matches!(
            nonlocal_constant(&tr, &field, 0.0, &[0.5]),
            Err(Error::NotRegistered(_))
        ));
        assert!(matches!(
            action(&tr, 0.0, 1.0),
            Err(Error::NotRegistered(_))
        ));
    }

    #[test]
    fn sample_outside_span_is_a_range_error() {
        let field = VariationField::null();
        let init = State::new(0.0, vec![1.0, 0.2, 0.0], vec![0.1, -0.4, 0.8]);
        let tr = integrate(
            &MaxwellBloch,
            &init,
            1.0,
            &IntegratorConfig::default(),
            &[Integrand::Family(field.clone())],
        )
        .unwrap();
        assert!(matches!(
            nonlocal_constant(&tr, &field, 0.0, &[2.0]),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn action_of_free_damped_particle() {
        let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let tr = integrate(
            &sys,
            &init,
            1.0,
            &IntegratorConfig::default(),
            &[Integrand::Action],
        )
        .unwrap();
        // ∫_0^1 e^t · e^{−2t}/2 dt
        let exact = 0.5 * (1.0 - (-1f64).exp());
        assert!((action(&tr, 0.0, 1.0).unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn action_vanishes_for_resting_free_particle() {
        let sys = Dissipative::new(1, 0.0, Potential::Zero).unwrap();
        let init = State::new(0.0, vec![0.3], vec![0.0]);
        let tr = integrate(
            &sys,
            &init,
            2.0,
            &IntegratorConfig::default(),
            &[Integrand::Action],
        )
        .unwrap();
        assert_eq!(action(&tr, 0.0, 2.0).unwrap(), 0.0);
    }
}
