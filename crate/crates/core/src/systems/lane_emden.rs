//! Lane-Emden equation `q̈ = −qⁿ − 2q̇/t` from `L = t²(q̇²/2 − q^{n+1}/(n+1))`.

use crate::autodiff::Scalar;
use crate::error::{Error, Result};
use crate::integrate::{Integrand, Trajectory};
use crate::lagrangian::{boundary_term, Lagrangian, State, TimeDomain, VariationField, Warp};
use crate::series::Series;

#[derive(Clone, Debug, PartialEq)]
pub struct LaneEmden {
    n: u32,
}

/// The four perturbation families with a rearranged constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaneEmdenConstant {
    /// `q(t − λ/t²)`
    First,
    /// `q(t + λt²)`
    Second,
    /// `e^λ q(e^λ t)`
    Third,
    /// `e^λ q(e^{λ(n−1)/2} t)`, which maps solutions to solutions.
    DynSym,
}

impl LaneEmdenConstant {
    pub const ALL: [LaneEmdenConstant; 4] = [
        LaneEmdenConstant::First,
        LaneEmdenConstant::Second,
        LaneEmdenConstant::Third,
        LaneEmdenConstant::DynSym,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            LaneEmdenConstant::First => "first",
            LaneEmdenConstant::Second => "second",
            LaneEmdenConstant::Third => "third",
            LaneEmdenConstant::DynSym => "dyn_sym",
        }
    }
}

impl std::str::FromStr for LaneEmdenConstant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LaneEmdenConstant::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown Lane-Emden constant `{s}`")))
    }
}

impl LaneEmden {
    pub fn new(n: u32) -> Result<Self> {
        if n > 64 {
            return Err(Error::Config(format!(
                "polytropic index {n} is out of range"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn np1(&self) -> f64 {
        (self.n + 1) as f64
    }

    fn pow_np1(&self, q: f64) -> f64 {
        q.powi(self.n as i32 + 1)
    }

    /// `𝓔 = ½q̇² + q^{n+1}/(n+1)`.
    pub fn energy(&self, q: f64, qdot: f64) -> f64 {
        0.5 * qdot * qdot + self.pow_np1(q) / self.np1()
    }

    /// `t⁴(q̇² + 2q^{n+1}/(n+1))`, nondecreasing in `t` for odd `n`.
    pub fn weighted_energy(&self, t: f64, q: f64, qdot: f64) -> f64 {
        t.powi(4) * (qdot * qdot + 2.0 * self.pow_np1(q) / self.np1())
    }

    /// Local part of the third constant, `t²(2t q^{n+1}/(n+1) + q q̇ + t q̇²)`.
    pub fn third_local(&self, t: f64, q: f64, qdot: f64) -> f64 {
        t * t * (2.0 * t * self.pow_np1(q) / self.np1() + q * qdot + t * qdot * qdot)
    }

    /// Rearranged constant at one state, given the integral of its channel
    /// from the anchor state `anchor` (see [`constant`]).
    pub fn constant_at(
        &self,
        which: LaneEmdenConstant,
        anchor: &State,
        state: &State,
        qddot: &[f64],
        integral: f64,
    ) -> Result<f64> {
        let (t, q, v) = (state.t, state.q[0], state.qdot[0]);
        let n = self.n as f64;
        let np1 = self.np1();
        Ok(match which {
            LaneEmdenConstant::First => self.energy(q, v) + integral,
            LaneEmdenConstant::Second => self.weighted_energy(t, q, v) - 8.0 / np1 * integral,
            LaneEmdenConstant::Third => self.third_local(t, q, v) + (n - 5.0) / np1 * integral,
            LaneEmdenConstant::DynSym => {
                let beta = (n - 1.0) / 2.0;
                let (t0, q0, v0) = (anchor.t, anchor.q[0], anchor.qdot[0]);
                let shift = (1.0 - beta) * t0 * t0 * q0 * v0
                    - 2.0 * beta / np1 * t0.powi(3) * self.pow_np1(q0);
                boundary_term(self, &self.family(which), state, qddot)? - integral - shift
            }
        })
    }

    /// Variation field of a family.
    pub fn family(&self, which: LaneEmdenConstant) -> VariationField {
        match which {
            LaneEmdenConstant::First => VariationField::time_shift(Warp::Power {
                coeff: -1.0,
                exponent: -2.0,
            }),
            LaneEmdenConstant::Second => VariationField::time_shift(Warp::Power {
                coeff: 1.0,
                exponent: 2.0,
            }),
            LaneEmdenConstant::Third => VariationField::scaling(vec![1.0], 1.0),
            LaneEmdenConstant::DynSym => {
                VariationField::scaling(vec![1.0], (self.n as f64 - 1.0) / 2.0)
            }
        }
    }

    /// Channel feeding the rearranged constant. The dynamical-symmetry
    /// constant reuses the generic family integrand.
    pub fn integrand(&self, which: LaneEmdenConstant) -> Integrand {
        let n = self.n as i32;
        match which {
            LaneEmdenConstant::First => {
                Integrand::scalar("lane_emden.first_integrand", |t, _q, v| {
                    2.0 * v[0] * v[0] / t
                })
            }
            LaneEmdenConstant::Second => Integrand::scalar(
                format!("lane_emden.second_integrand[n={n}]"),
                move |t, q, _| t.powi(3) * q[0].powi(n + 1),
            ),
            LaneEmdenConstant::Third => Integrand::scalar(
                format!("lane_emden.third_integrand[n={n}]"),
                move |t, q, _| t * t * q[0].powi(n + 1),
            ),
            LaneEmdenConstant::DynSym => Integrand::Family(self.family(LaneEmdenConstant::DynSym)),
        }
    }

    pub fn integrands(&self) -> Vec<Integrand> {
        LaneEmdenConstant::ALL
            .iter()
            .map(|&c| self.integrand(c))
            .collect()
    }
}

impl Lagrangian for LaneEmden {
    fn name(&self) -> &str {
        "lane_emden"
    }

    fn dim(&self) -> usize {
        1
    }

    fn lagrangian<S: Scalar>(&self, t: S, q: &[S], qdot: &[S]) -> S {
        let np1 = self.n as i32 + 1;
        t * t * (qdot[0] * qdot[0] * 0.5 - q[0].powi(np1) / np1 as f64)
    }

    fn accel(&self, t: f64, q: &[f64], qdot: &[f64], out: &mut [f64]) {
        out[0] = -q[0].powi(self.n as i32) - 2.0 * qdot[0] / t;
    }

    fn time_domain(&self) -> TimeDomain {
        TimeDomain::POSITIVE
    }
}

/// Rearranged constant of a family at every node.
///
/// * `First`: `½q̇² + q^{n+1}/(n+1) + ∫_{t0}^{t} 2q̇²/s ds`
/// * `Second`: `t⁴(q̇² + 2q^{n+1}/(n+1)) + 8/(n+1) ∫_t^{t0} s³q^{n+1} ds`
/// * `Third`: `t²(2tq^{n+1}/(n+1) + qq̇ + tq̇²) + (n−5)/(n+1) ∫_{t0}^{t} s²q^{n+1} ds`
/// * `DynSym`: the nonlocal constant of `e^λ q(e^{λ(n−1)/2} t)` shifted by
///   its integration-by-parts boundary term at `t0`; equals `(n−1)/2` times
///   `Third` along solutions.
pub fn constant(tr: &Trajectory<LaneEmden>, which: LaneEmdenConstant, t0: f64) -> Result<Series> {
    let sys = tr.system();
    let integrand = sys.integrand(which);
    let ch = tr
        .channel_named(&integrand.name())
        .ok_or_else(|| Error::NotRegistered(integrand.name()))?;
    let base = tr.accumulated(ch, t0)?;
    let anchor = tr.eval(t0)?.state;
    let mut values = Vec::with_capacity(tr.node_count());
    for i in 0..tr.node_count() {
        let s = tr.node_sample(i);
        values.push(sys.constant_at(which, &anchor, &s.state, &s.qddot, s.acc[ch] - base)?);
    }
    Ok(Series::new(
        format!("lane_emden.{}[n={}]", which.id(), sys.n),
        t0,
        tr.times().to_vec(),
        values,
    ))
}

/// Decay constants of a solution over a window of large `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Asymptotics {
    pub window: (f64, f64),
    /// `sup t² F(t)` with `F = 2tq^{n+1}/(n+1) + qq̇ + tq̇²`, so `F ≤ c1/t²`.
    pub c1: f64,
    /// `sup (c1/t² + q²/2)`.
    pub c2: f64,
    /// Smallest `c3` with `|q| ≤ c3 t^{−1/(n+1)}` on the window.
    pub c3: f64,
    /// Smallest `c4` with `|q̇| ≤ c4 t^{−1/2}` on the window.
    pub c4: f64,
    /// Log-log slope of the upper envelope of `|q|`, if it is nonzero.
    pub q_exponent: Option<f64>,
    pub qdot_exponent: Option<f64>,
    /// `2tq^{n+1}/(n+1) + (t−½)q̇² ≤ c1/t² + q²/2` at every sample.
    pub chain_holds: bool,
    pub samples: usize,
}

/// Fits the asymptotic bounds on `[window.0, window.1]`; needs odd `n ≥ 5`.
pub fn asymptotics(tr: &Trajectory<LaneEmden>, window: (f64, f64)) -> Result<Asymptotics> {
    let sys = tr.system();
    let n = sys.n;
    if n.is_multiple_of(2) || n < 5 {
        return Err(Error::Unsupported(format!(
            "asymptotic estimates need odd n >= 5, got n = {n}"
        )));
    }
    let (a, b) = window;
    if !(a >= 10.0 && b > a) {
        return Err(Error::Config(format!(
            "asymptotics window must satisfy 10 <= start < end, got [{a}, {b}]"
        )));
    }
    const GRID: usize = 600;
    let mut times: Vec<f64> = (0..=GRID)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / GRID as f64).exp())
        .collect();
    times[GRID] = b;
    times.extend(tr.times().iter().copied().filter(|&t| t > a && t < b));
    times.sort_by(f64::total_cmp);
    times.dedup();

    let np1 = sys.np1();
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let s = tr.state_at(t)?;
        rows.push((t, s.q[0], s.qdot[0]));
    }
    let f = |t: f64, q: f64, v: f64| 2.0 * t * sys.pow_np1(q) / np1 + q * v + t * v * v;
    let c1 = rows
        .iter()
        .map(|&(t, q, v)| t * t * f(t, q, v))
        .fold(0.0f64, f64::max);
    let c2 = rows
        .iter()
        .map(|&(t, q, _)| c1 / (t * t) + 0.5 * q * q)
        .fold(0.0f64, f64::max);
    let c3 = rows
        .iter()
        .map(|&(t, q, _)| q.abs() * t.powf(1.0 / np1))
        .fold(0.0f64, f64::max);
    let c4 = rows
        .iter()
        .map(|&(t, _, v)| v.abs() * t.sqrt())
        .fold(0.0f64, f64::max);
    let chain_holds = rows.iter().all(|&(t, q, v)| {
        let lhs = 2.0 * t * sys.pow_np1(q) / np1 + (t - 0.5) * v * v;
        let rhs = c1 / (t * t) + 0.5 * q * q;
        lhs <= rhs + 1e-12 * rhs.abs().max(1.0)
    });

    let q_abs: Vec<f64> = rows.iter().map(|r| r.1.abs()).collect();
    let v_abs: Vec<f64> = rows.iter().map(|r| r.2.abs()).collect();
    Ok(Asymptotics {
        window,
        c1,
        c2,
        c3,
        c4,
        q_exponent: envelope_exponent(&times, &q_abs),
        qdot_exponent: envelope_exponent(&times, &v_abs),
        chain_holds,
        samples: rows.len(),
    })
}

/// Least-squares slope of `log env(t)` against `log t`, where `env` is the
/// running maximum from the right (the decreasing upper envelope).
pub fn envelope_exponent(times: &[f64], values: &[f64]) -> Option<f64> {
    let mut env = vec![0.0; values.len()];
    let mut running = 0.0f64;
    for i in (0..values.len()).rev() {
        running = running.max(values[i]);
        env[i] = running;
    }
    if env.iter().any(|&e| !(e > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = env.iter().map(|e| e.ln()).collect();
    crate::verify::least_squares_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::euler_lagrange_residual;

    #[test]
    fn exact_n5_solution_zeroes_third_local() {
        let le = LaneEmden::new(5).unwrap();
        for t in [0.1, 1.0, 3.0, 10.0, 50.0] {
            let q = (1.0 + t * t / 3.0).powf(-0.5);
            let v = -(t / 3.0) * (1.0 + t * t / 3.0).powf(-1.5);
            assert!(le.third_local(t, q, v).abs() < 1e-12 * t.max(1.0).powi(3));
        }
    }

    #[test]
    fn accel_matches_lagrangian_for_odd_and_even_n() {
        for n in [1, 2, 3, 5, 7] {
            let le = LaneEmden::new(n).unwrap();
            let r = euler_lagrange_residual(&le, &State::new(1.7, vec![-0.6], vec![0.9])).unwrap();
            assert!(r[0].abs() < 1e-8, "n={n}: {r:?}");
        }
    }

    #[test]
    fn constant_ids_round_trip() {
        for c in LaneEmdenConstant::ALL {
            assert_eq!(c.id().parse::<LaneEmdenConstant>().unwrap(), c);
        }
        assert!("fourth".parse::<LaneEmdenConstant>().is_err());
    }

    #[test]
    fn envelope_of_power_law() {
        let times: Vec<f64> = (1..50).map(|i| i as f64 * 10.0).collect();
        let vals: Vec<f64> = times.iter().map(|t| 3.0 * t.powf(-0.4)).collect();
        let s = envelope_exponent(&times, &vals).unwrap();
        assert!((s + 0.4).abs() < 1e-12);
        assert_eq!(envelope_exponent(&times, &vec![0.0; times.len()]), None);
    }
}
