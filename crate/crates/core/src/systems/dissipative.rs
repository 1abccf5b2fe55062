//! Damped motion `q̈ = −k q̇ − ∇U(q)` from `L = e^{kt}(½|q̇|² − U(q))`.

use crate::autodiff::Scalar;
use crate::error::{Error, Result};
use crate::integrate::{Integrand, Trajectory};
use crate::lagrangian::{Lagrangian, State, VariationField, Warp};
use crate::series::Series;

/// One-dimensional potential profile from samples, interpolated by a
/// monotone cubic (Fritsch-Carlson) and held constant outside the knots.
///
/// Monotone interpolation never overshoots the samples, so the smallest
/// sample is the exact infimum of the profile.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTable {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PotentialTable {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(Error::Config(
                "potential table needs at least two (q, U) pairs".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(
                "potential table knots must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(
                "potential table values must be finite".into(),
            ));
        }
        let m = knots.len();
        let secants: Vec<f64> = (0..m - 1)
            .map(|i| (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]))
            .collect();
        // flat ends keep the profile C¹ where it joins the constant extension
        let mut slopes = vec![0.0; m];
        for i in 1..m - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            slopes[i] = if a * b <= 0.0 {
                0.0
            } else {
                let w1 = 2.0 * (knots[i + 1] - knots[i]) + (knots[i] - knots[i - 1]);
                let w2 = (knots[i + 1] - knots[i]) + 2.0 * (knots[i] - knots[i - 1]);
                (w1 + w2) / (w1 / a + w2 / b)
            };
        }
        Ok(Self {
            knots,
            values,
            slopes,
        })
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn segment(&self, x: f64) -> Option<usize> {
        let m = self.knots.len();
        if x <= self.knots[0] || x >= self.knots[m - 1] {
            return None;
        }
        let i = self.knots.partition_point(|&k| k <= x);
        Some(i - 1)
    }

    fn value<S: Scalar>(&self, x: S) -> S {
        let xv = x.value();
        match self.segment(xv) {
            None => {
                let end = if xv <= self.knots[0] {
                    self.values[0]
                } else {
                    self.values[self.values.len() - 1]
                };
                S::cst(end)
            }
            Some(i) => {
                let h = self.knots[i + 1] - self.knots[i];
                let s = (x - self.knots[i]) / h;
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = s3 * 2.0 - s2 * 3.0 + 1.0;
                let h10 = s3 - s2 * 2.0 + s;
                let h01 = s3 * -2.0 + s2 * 3.0;
                let h11 = s3 - s2;
                h00 * self.values[i]
                    + h10 * (h * self.slopes[i])
                    + h01 * self.values[i + 1]
                    + h11 * (h * self.slopes[i + 1])
            }
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match self.segment(x) {
            None => 0.0,
            Some(i) => {
                let h = self.knots[i + 1] - self.knots[i];
                let s = (x - self.knots[i]) / h;
                let s2 = s * s;
                let d00 = 6.0 * s2 - 6.0 * s;
                let d10 = 3.0 * s2 - 4.0 * s + 1.0;
                let d01 = -6.0 * s2 + 6.0 * s;
                let d11 = 3.0 * s2 - 2.0 * s;
                (d00 * self.values[i] + d01 * self.values[i + 1]) / h
                    + d10 * self.slopes[i]
                    + d11 * self.slopes[i + 1]
            }
        }
    }
}

/// Potential energy `U(q)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Zero,
    /// `U = ½ stiffness |q|²`
    Quadratic {
        stiffness: f64,
    },
    /// `U = Σ_i f(q_i)` with `f` tabulated.
    Table(PotentialTable),
}

impl Potential {
    pub fn value<S: Scalar>(&self, q: &[S]) -> S {
        match self {
            Potential::Zero => S::zero(),
            Potential::Quadratic { stiffness } => S::norm_sq(q) * (0.5 * stiffness),
            Potential::Table(table) => q.iter().fold(S::zero(), |acc, &x| acc + table.value(x)),
        }
    }

    pub fn gradient(&self, q: &[f64], out: &mut [f64]) {
        match self {
            Potential::Zero => out.fill(0.0),
            Potential::Quadratic { stiffness } => {
                for (o, x) in out.iter_mut().zip(q) {
                    *o = stiffness * x;
                }
            }
            Potential::Table(table) => {
                for (o, &x) in out.iter_mut().zip(q) {
                    *o = table.derivative(x);
                }
            }
        }
    }

    /// Exact lower bound, when the potential is bounded below.
    pub fn infimum(&self, dim: usize) -> Option<f64> {
        match self {
            Potential::Zero => Some(0.0),
            Potential::Quadratic { stiffness } if *stiffness >= 0.0 => Some(0.0),
            Potential::Quadratic { .. } => None,
            Potential::Table(table) => Some(dim as f64 * table.min_value()),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Potential::Zero => "zero",
            Potential::Quadratic { .. } => "quadratic",
            Potential::Table(_) => "user-table",
        }
    }
}

/// Damped mechanical system with a potential bounded from below.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissipative {
    dim: usize,
    k: f64,
    potential: Potential,
    u_inf: f64,
}

impl Dissipative {
    pub fn new(dim: usize, k: f64, potential: Potential) -> Result<Self> {
        let u_inf = potential.infimum(dim).ok_or_else(|| {
            Error::Config("potential is not bounded from below; supply U_inf".into())
        })?;
        Self::with_infimum(dim, k, potential, u_inf)
    }

    /// Uses a caller-supplied lower bound `U_inf` for the potential.
    pub fn with_infimum(dim: usize, k: f64, potential: Potential, u_inf: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::Config(format!("damping k must be >= 0, got {k}")));
        }
        if !u_inf.is_finite() {
            return Err(Error::Config("U_inf must be finite".into()));
        }
        Ok(Self {
            dim,
            k,
            potential,
            u_inf,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn u_inf(&self) -> f64 {
        self.u_inf
    }

    pub fn u(&self, q: &[f64]) -> f64 {
        self.potential.value(q)
    }

    /// `𝓔 = ½|q̇|² + U(q)`.
    pub fn energy(&self, q: &[f64], qdot: &[f64]) -> f64 {
        0.5 * f64::norm_sq(qdot) + self.u(q)
    }

    /// `E = ∂L/∂q̇ · q̇ − L = e^{kt} 𝓔`.
    pub fn dissipative_energy(&self, t: f64, q: &[f64], qdot: &[f64]) -> f64 {
        (self.k * t).exp() * self.energy(q, qdot)
    }

    /// `q_λ(t) = q(t + λ e^{a t})`.
    pub fn family(&self, a: f64) -> VariationField {
        VariationField::time_shift(Warp::Exp { rate: a })
    }

    /// `e^{(a+k)s}((a−k)|q̇|² + 2(a+k)U)`, the integrand of the rearranged constant.
    pub fn rearranged_integrand(&self, a: f64) -> Integrand {
        let sys = self.clone();
        Integrand::scalar(
            format!("dissipative.integrand[a={a}]"),
            move |t, q, qdot| {
                let k = sys.k;
                ((a + k) * t).exp() * ((a - k) * f64::norm_sq(qdot) + 2.0 * (a + k) * sys.u(q))
            },
        )
    }

    /// Same integrand with `U` replaced by `U − U_inf`; one-signed for
    /// `a ≥ k` (nonnegative) and `a ≤ −k` (nonpositive).
    pub fn shifted_integrand(&self, a: f64) -> Integrand {
        let sys = self.clone();
        Integrand::scalar(
            format!("dissipative.shifted_integrand[a={a}]"),
            move |t, q, qdot| {
                let k = sys.k;
                ((a + k) * t).exp()
                    * ((a - k) * f64::norm_sq(qdot) + 2.0 * (a + k) * (sys.u(q) - sys.u_inf))
            },
        )
    }

    /// [`rearranged_constant`] at one state, given `∫_{t0}^{t}` of [`Self::rearranged_integrand`].
    pub fn rearranged_constant_at(&self, a: f64, state: &State, integral: f64) -> f64 {
        ((a + self.k) * state.t).exp() * (f64::norm_sq(&state.qdot) + 2.0 * self.u(&state.q))
            - integral
    }

    /// `|q̇|²`, for the L² estimate.
    pub fn speed_sq_integrand(&self) -> Integrand {
        Integrand::scalar("dissipative.speed_sq", |_, _, qdot| f64::norm_sq(qdot))
    }

    /// Channels needed by [`rearranged_constant`] and [`estimates`] for the given rates.
    pub fn integrands(&self, rates: &[f64]) -> Vec<Integrand> {
        let mut v: Vec<Integrand> = rates
            .iter()
            .map(|&a| self.rearranged_integrand(a))
            .collect();
        v.push(self.speed_sq_integrand());
        v
    }
}

impl Lagrangian for Dissipative {
    fn name(&self) -> &str {
        "dissipative"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn lagrangian<S: Scalar>(&self, t: S, q: &[S], qdot: &[S]) -> S {
        (t * self.k).exp() * (S::norm_sq(qdot) * 0.5 - self.potential.value(q))
    }

    fn accel(&self, _t: f64, q: &[f64], qdot: &[f64], out: &mut [f64]) {
        self.potential.gradient(q, out);
        for (o, v) in out.iter_mut().zip(qdot) {
            *o = -self.k * v - *o;
        }
    }
}

fn channel<L: Lagrangian>(tr: &Trajectory<L>, integrand: &Integrand) -> Result<usize> {
    let name = integrand.name();
    tr.channel_named(&name).ok_or(Error::NotRegistered(name))
}

/// `e^{(a+k)t}(|q̇|² + 2U) + ∫_t^{t0} e^{(a+k)s}((a−k)|q̇|² + 2(a+k)U) ds`
/// at every node; constant along solutions.
pub fn rearranged_constant(tr: &Trajectory<Dissipative>, a: f64, t0: f64) -> Result<Series> {
    let sys = tr.system();
    let ch = channel(tr, &sys.rearranged_integrand(a))?;
    let base = tr.accumulated(ch, t0)?;
    let values = (0..tr.node_count())
        .map(|i| {
            let s = tr.node_sample(i);
            sys.rearranged_constant_at(a, &s.state, s.acc[ch] - base)
        })
        .collect();
    Ok(Series::new(
        format!("dissipative.rearranged_constant[a={a}]"),
        t0,
        tr.times().to_vec(),
        values,
    ))
}

/// Outcome of one inequality checked at every node on one side of `t0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub holds: bool,
    /// `min (bound − value)`; negative means a violation.
    pub min_margin: f64,
    pub worst_time: f64,
    /// `max (bound − value) / max(1, |bound|)`; zero when the bound is sharp.
    pub max_rel_gap: f64,
    pub samples: usize,
}

impl BoundCheck {
    fn new() -> Self {
        Self {
            holds: true,
            min_margin: f64::INFINITY,
            worst_time: f64::NAN,
            max_rel_gap: 0.0,
            samples: 0,
        }
    }

    fn record(&mut self, t: f64, value: f64, bound: f64, tol: f64) {
        let margin = bound - value;
        let scale = bound.abs().max(1.0);
        if margin < self.min_margin {
            self.min_margin = margin;
            self.worst_time = t;
        }
        self.max_rel_gap = self.max_rel_gap.max(margin / scale);
        if margin < -tol * scale {
            self.holds = false;
        }
        self.samples += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DissipativeEstimates {
    /// `½|q̇(t)|² ≤ ½|q̇(t0)|² + U(q(t0)) − U_inf` for `t ≥ t0`.
    pub future_speed: Option<BoundCheck>,
    /// `𝓔` nonincreasing over the whole trajectory.
    pub energy_nonincreasing: BoundCheck,
    /// `∫_{t0}^{t}|q̇|² ≤ (𝓔(t0) − U_inf)/k` for `t ≥ t0`.
    pub l2_speed: Option<BoundCheck>,
    /// `𝓔(t) − U_inf ≤ e^{2k(t0−t)}(𝓔(t0) − U_inf)` for `t ≤ t0`.
    pub past_energy: Option<BoundCheck>,
    /// `|q̇(t)|² ≤ e^{2k(t0−t)}(|q̇(t0)|² + 2U(q(t0)) − 2U_inf)` for `t ≤ t0`.
    pub past_speed: Option<BoundCheck>,
    /// `e^{2kt}(𝓔 − U_inf)` nondecreasing (the `a = k` weighted energy).
    pub weighted_energy_nondecreasing: BoundCheck,
}

impl DissipativeEstimates {
    pub fn all_hold(&self) -> bool {
        let opt = |c: &Option<BoundCheck>| c.as_ref().is_none_or(|c| c.holds);
        opt(&self.future_speed)
            && self.energy_nonincreasing.holds
            && opt(&self.l2_speed)
            && opt(&self.past_energy)
            && opt(&self.past_speed)
            && self.weighted_energy_nondecreasing.holds
    }
}

/// Checks the future and past energy estimates at every node, allowing a
/// relative slack of `tol`. Sides of `t0` not covered by the trajectory are
/// reported as `None`.
pub fn estimates(tr: &Trajectory<Dissipative>, t0: f64, tol: f64) -> Result<DissipativeEstimates> {
    let sys = tr.system();
    let k = sys.k;
    let u_inf = sys.u_inf;
    let ch = channel(tr, &sys.speed_sq_integrand())?;
    let anchor = tr.eval(t0)?;
    let e0 = sys.energy(&anchor.state.q, &anchor.state.qdot);
    let speed0 = f64::norm_sq(&anchor.state.qdot);
    let base = anchor.acc[ch];
    let (start, end) = tr.span();

    let mut future_speed = (end > t0).then(BoundCheck::new);
    let mut l2 = (end > t0 && k > 0.0).then(BoundCheck::new);
    let mut past_energy = (start < t0).then(BoundCheck::new);
    let mut past_speed = (start < t0).then(BoundCheck::new);
    let mut monotone = BoundCheck::new();
    let mut weighted = BoundCheck::new();

    let mut prev: Option<(f64, f64)> = None;
    for i in 0..tr.node_count() {
        let s = tr.node_sample(i);
        let t = s.state.t;
        let v2 = f64::norm_sq(&s.state.qdot);
        let e = sys.energy(&s.state.q, &s.state.qdot);
        let w = (2.0 * k * t).exp() * (e - u_inf);
        if let Some((e_prev, w_prev)) = prev {
            monotone.record(t, e, e_prev, tol);
            weighted.record(t, w_prev, w, tol);
        }
        prev = Some((e, w));
        if t >= t0 {
            if let Some(c) = future_speed.as_mut() {
                c.record(t, 0.5 * v2, e0 - u_inf, tol);
            }
            if let Some(c) = l2.as_mut() {
                c.record(t, s.acc[ch] - base, (e0 - u_inf) / k, tol);
            }
        }
        if t <= t0 {
            let growth = (2.0 * k * (t0 - t)).exp();
            if let Some(c) = past_energy.as_mut() {
                c.record(t, e - u_inf, growth * (e0 - u_inf), tol);
            }
            if let Some(c) = past_speed.as_mut() {
                c.record(
                    t,
                    v2,
                    growth * (speed0 + 2.0 * sys.u(&anchor.state.q) - 2.0 * u_inf),
                    tol,
                );
            }
        }
    }
    Ok(DissipativeEstimates {
        future_speed,
        energy_nonincreasing: monotone,
        l2_speed: l2,
        past_energy,
        past_speed,
        weighted_energy_nondecreasing: weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate_two_sided, IntegratorConfig};
    use crate::lagrangian::euler_lagrange_residual;

    #[test]
    fn table_interpolates_knots_and_stays_above_min() {
        let t = PotentialTable::new(
            vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            vec![4.0, 1.0, 0.0, 1.0, 4.0],
        )
        .unwrap();
        let p = Potential::Table(t.clone());
        for (x, u) in [(-1.0, 1.0), (0.0, 0.0), (2.0, 4.0), (5.0, 4.0), (-9.0, 4.0)] {
            assert!((p.value(&[x]) - u).abs() < 1e-15, "{x}");
        }
        for i in 0..=400 {
            let x = -3.0 + 6.0 * i as f64 / 400.0;
            assert!(p.value(&[x]) >= t.min_value() - 1e-15);
        }
        assert_eq!(p.infimum(2), Some(0.0));
    }

    #[test]
    fn table_derivative_matches_autodiff() {
        use crate::autodiff::Dual;
        let t = PotentialTable::new(vec![0.0, 0.5, 1.5, 2.0], vec![1.0, -0.5, 0.25, 2.0]).unwrap();
        for x in [0.1, 0.7, 1.2, 1.9] {
            let ad = t.value(Dual::variable(x)).deriv;
            assert!((ad - t.derivative(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(PotentialTable::new(vec![0.0], vec![1.0]).is_err());
        assert!(PotentialTable::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(PotentialTable::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn accel_matches_lagrangian() {
        let sys = Dissipative::new(2, 0.7, Potential::Quadratic { stiffness: 1.3 }).unwrap();
        let r = euler_lagrange_residual(&sys, &State::new(0.4, vec![0.3, -1.0], vec![1.1, 0.2]))
            .unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-8), "{r:?}");
    }

    #[test]
    fn negative_damping_rejected() {
        assert!(Dissipative::new(1, -1.0, Potential::Zero).is_err());
        assert!(Dissipative::new(1, 1.0, Potential::Quadratic { stiffness: -1.0 }).is_err());
    }

    #[test]
    fn equilibrium_estimates_hold_trivially() {
        let sys = Dissipative::new(1, 0.5, Potential::Quadratic { stiffness: 1.0 }).unwrap();
        let init = State::new(0.0, vec![0.0], vec![0.0]);
        let tr = integrate_two_sided(
            &sys,
            &init,
            -2.0,
            2.0,
            &IntegratorConfig::default(),
            &sys.integrands(&[]),
        )
        .unwrap();
        let est = estimates(&tr, 0.0, 1e-12).unwrap();
        assert!(est.all_hold());
        assert_eq!(est.energy_nonincreasing.min_margin, 0.0);
    }
}
