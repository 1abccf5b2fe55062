//! Conservative Maxwell-Bloch equations with rotating-wave approximation,
//! embedded as the Lagrangian system
//! `L = ½(q̇₁² + q̇₂² + q̇₃² + q̇₃(q₁² + q₂²))`.

use crate::autodiff::Scalar;
use crate::error::{Error, Result};
use crate::integrate::{Integrand, Trajectory};
use crate::lagrangian::{Lagrangian, State, VariationField};
use crate::series::Series;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MaxwellBloch;

/// `E`, `B`, `J` and the derived `K = 2BE − ½J²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstIntegrals {
    pub e: f64,
    pub b: f64,
    pub j: f64,
    pub k: f64,
}

impl Lagrangian for MaxwellBloch {
    fn name(&self) -> &str {
        "maxwell_bloch"
    }

    fn dim(&self) -> usize {
        3
    }

    fn lagrangian<S: Scalar>(&self, _t: S, q: &[S], v: &[S]) -> S {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[2] * (q[0] * q[0] + q[1] * q[1])) * 0.5
    }

    fn accel(&self, _t: f64, q: &[f64], v: &[f64], out: &mut [f64]) {
        out[0] = q[0] * v[2];
        out[1] = q[1] * v[2];
        out[2] = -(q[0] * v[0] + q[1] * v[1]);
    }
}

fn check_dim(state: &State) -> Result<()> {
    if state.q.len() != 3 || state.qdot.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: state.q.len().max(state.qdot.len()),
        });
    }
    Ok(())
}

impl MaxwellBloch {
    pub fn first_integrals(state: &State) -> Result<FirstIntegrals> {
        check_dim(state)?;
        let (q, v) = (&state.q, &state.qdot);
        let e = 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        let b = v[2] + 0.5 * (q[0] * q[0] + q[1] * q[1]);
        let j = q[0] * v[1] - q[1] * v[0];
        Ok(FirstIntegrals {
            e,
            b,
            j,
            k: 2.0 * b * e - 0.5 * j * j,
        })
    }

    /// `½q̈₃² + 2Eq̇₃ + Bq̇₃² − q̇₃³` with `q̈₃` from the equations of motion
    /// and `E`, `B` supplied.
    pub fn k_cubic_form(state: &State, e: f64, b: f64) -> f64 {
        let (q, v) = (&state.q, &state.qdot);
        let a3 = -(q[0] * v[0] + q[1] * v[1]);
        let u = v[2];
        0.5 * a3 * a3 + 2.0 * e * u + b * u * u - u * u * u
    }

    /// `½(q₁q̇₁ + q₂q̇₂)² + (q̇₁² + q̇₂² + q̇₃²)q̇₃ + ½(q₁² + q₂²)q̇₃²`.
    pub fn k_state_form(state: &State) -> f64 {
        let (q, v) = (&state.q, &state.qdot);
        let r = q[0] * v[0] + q[1] * v[1];
        0.5 * r * r
            + (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * v[2]
            + 0.5 * (q[0] * q[0] + q[1] * q[1]) * v[2] * v[2]
    }

    /// `q_λ = (e^λ q₁, e^λ q₂, e^{aλ} q₃)`.
    pub fn family(a: f64) -> VariationField {
        VariationField::scaling(vec![1.0, 1.0, a], 0.0)
    }

    pub fn qdot3_sq_integrand() -> Integrand {
        Integrand::scalar("maxwell_bloch.qdot3_sq", |_, _, v| v[2] * v[2])
    }

    /// Maps `(x₁, y₁, x₂, y₂, z)` to the Lagrangian state; `q₃` is free.
    pub fn embed(t: f64, xyz: [f64; 5], q3: f64) -> State {
        let [x1, y1, x2, y2, z] = xyz;
        State::new(t, vec![x1, x2, q3], vec![y1, y2, z])
    }

    pub fn project(state: &State) -> Result<[f64; 5]> {
        check_dim(state)?;
        Ok([
            state.q[0],
            state.qdot[0],
            state.q[1],
            state.qdot[1],
            state.qdot[2],
        ])
    }

    /// Right-hand side of the 5-dimensional system.
    pub fn five_dim_rhs(xyz: [f64; 5]) -> [f64; 5] {
        let [x1, y1, x2, y2, z] = xyz;
        [y1, x1 * z, y2, x2 * z, -(x1 * y1 + x2 * y2)]
    }
}

/// `ψ_{E,B}(u, v) = ½v² + 2Eu + Bu² − u³`.
pub fn psi(e: f64, b: f64, u: f64, v: f64) -> f64 {
    0.5 * v * v + 2.0 * e * u + b * u * u - u * u * u
}

/// `∇ψ_{E,B}(u, v)`.
pub fn psi_gradient(e: f64, b: f64, u: f64, v: f64) -> (f64, f64) {
    (2.0 * e + 2.0 * b * u - 3.0 * u * u, v)
}

/// Homoclinic solution of the 5-dimensional system from `x₁(0) = 2`,
/// `z(0) = −1`.
pub fn homoclinic(t: f64) -> [f64; 5] {
    let sech = 1.0 / t.cosh();
    let tanh = t.tanh();
    [
        2.0 * sech,
        -2.0 * sech * tanh,
        0.0,
        0.0,
        1.0 - 2.0 * sech * sech,
    ]
}

/// Stationary solution `q₁ = cos t + 3 sin t`, `q₂ = 3 cos t − sin t`, `q̇₃ = −1`.
pub fn stationary(t: f64) -> [f64; 5] {
    let (s, c) = t.sin_cos();
    [c + 3.0 * s, -s + 3.0 * c, 3.0 * c - s, -3.0 * s - c, -1.0]
}

/// `(q̇₁, q̇₂, B)·(q₁, q₂, −2q₃) − 2Et + 3∫_{t0}^{t} q̇₃² ds` at every node,
/// with `E` taken at `t0`.
pub fn rearranged_constant(tr: &Trajectory<MaxwellBloch>, t0: f64) -> Result<Series> {
    let integrand = MaxwellBloch::qdot3_sq_integrand();
    let ch = tr
        .channel_named(&integrand.name())
        .ok_or_else(|| Error::NotRegistered(integrand.name()))?;
    let anchor = tr.eval(t0)?;
    let e0 = MaxwellBloch::first_integrals(&anchor.state)?.e;
    let base = anchor.acc[ch];
    let mut values = Vec::with_capacity(tr.node_count());
    for i in 0..tr.node_count() {
        let s = tr.node_sample(i);
        values.push(rearranged_constant_at(&s.state, e0, s.acc[ch] - base));
    }
    Ok(Series::new(
        "maxwell_bloch.rearranged_constant",
        t0,
        tr.times().to_vec(),
        values,
    ))
}

/// [`rearranged_constant`] at one state, given `E` at `t0` and `∫_{t0}^{t} q̇₃² ds`.
pub fn rearranged_constant_at(state: &State, e0: f64, integral: f64) -> f64 {
    let (q, v) = (&state.q, &state.qdot);
    let b = v[2] + 0.5 * (q[0] * q[0] + q[1] * q[1]);
    v[0] * q[0] + v[1] * q[1] - 2.0 * b * q[2] - 2.0 * e0 * state.t + 3.0 * integral
}

/// `−q⃛₃ − 2Bq̇₃ − 2E + 3q̇₃²` with `q⃛₃ = −(q̇₁² + q̇₂² + (q₁² + q₂²)q̇₃)` and
/// `E`, `B` taken from the first node.
pub fn third_order_residual(tr: &Trajectory<MaxwellBloch>, samples: &[f64]) -> Result<Series> {
    let fi = MaxwellBloch::first_integrals(&tr.first_state())?;
    let mut values = Vec::with_capacity(samples.len());
    for &t in samples {
        let s = tr.state_at(t)?;
        values.push(third_order_residual_at(&s, fi.e, fi.b));
    }
    Ok(Series::new(
        "maxwell_bloch.third_order_residual",
        tr.span().0,
        samples.to_vec(),
        values,
    ))
}

pub fn third_order_residual_at(state: &State, e: f64, b: f64) -> f64 {
    let (q, v) = (&state.q, &state.qdot);
    let jerk3 = -(v[0] * v[0] + v[1] * v[1] + (q[0] * q[0] + q[1] * q[1]) * v[2]);
    -jerk3 - 2.0 * b * v[2] - 2.0 * e + 3.0 * v[2] * v[2]
}
