//! Adaptive Dormand-Prince 5(4) integration of `q̈ = accel(t, q, q̇)`.
//!
//! Besides position and velocity, the integrated vector carries one
//! quadrature channel per registered [`Integrand`]. Channels advance with the
//! same stages and the same accepted steps as the dynamics but do not take
//! part in step-size control, so registering extra channels never changes
//! the trajectory itself.

mod dopri;
mod start;
mod trajectory;

pub use start::{lane_emden_series_start, DEFAULT_SERIES_EPSILON};
pub use trajectory::{uniform_times, Sample, Trajectory};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lagrangian::{check_state, integrand_unchecked, Lagrangian, State, VariationField};

use dopri::*;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// `None` picks the initial step automatically.
    pub h_init: Option<f64>,
    pub h_min: f64,
    /// `None` means the full integration span.
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Integration stops once `|(q, q̇)|` exceeds this.
    pub blowup_norm: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_min: 1e-14,
            h_max: None,
            max_steps: 1_000_000,
            blowup_norm: 1e8,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be positive (rtol={}, atol={})",
                self.rtol, self.atol
            )));
        }
        if let Some(h_max) = self.h_max {
            if !(self.h_min <= h_max) {
                return Err(Error::Config(format!(
                    "h_min {} exceeds h_max {h_max}",
                    self.h_min
                )));
            }
        }
        if self.h_min < 0.0 || self.max_steps == 0 || !(self.blowup_norm > 0.0) {
            return Err(Error::Config("invalid step bounds or blow-up norm".into()));
        }
        Ok(())
    }
}

/// Scalar function `f(t, q, q̇)` integrated alongside the motion.
pub type ScalarFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;

/// A quadrature channel.
#[derive(Clone)]
pub enum Integrand {
    /// `∂_λ L` of a family, the integrand of its nonlocal constant.
    Family(VariationField),
    /// The Lagrangian itself; accumulates the action.
    Action,
    /// Any other function of the state, looked up by name.
    Scalar { name: String, f: ScalarFn },
}

impl Integrand {
    pub fn scalar(
        name: impl Into<String>,
        f: impl Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Integrand::Scalar {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Integrand::Family(f) => format!("family:{}", f.descriptor()),
            Integrand::Action => "action".to_string(),
            Integrand::Scalar { name, .. } => name.clone(),
        }
    }

    fn eval<L: Lagrangian + ?Sized>(
        &self,
        system: &L,
        t: f64,
        q: &[f64],
        qdot: &[f64],
        qddot: &[f64],
    ) -> Result<f64> {
        let value = match self {
            Integrand::Family(field) => integrand_unchecked(system, field, t, q, qdot, qddot)?,
            Integrand::Action => system.lagrangian(t, q, qdot),
            Integrand::Scalar { f, .. } => f(t, q, qdot),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Evaluation {
                what: "quadrature integrand",
                state: State::new(t, q.to_vec(), qdot.to_vec()),
            })
        }
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Why an integration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ReachedEnd,
    BlowUp,
    StepUnderflow,
    MaxSteps,
    ApproachedDomainBoundary,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::ReachedEnd => "reached_t_end",
            Termination::BlowUp => "blow_up",
            Termination::StepUnderflow => "step_underflow",
            Termination::MaxSteps => "max_steps",
            Termination::ApproachedDomainBoundary => "approached_domain_boundary",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closest time to an open domain boundary that integration will reach.
pub const DOMAIN_MARGIN: f64 = 1e-8;

/// Raw output of one directional run; nodes are in integration order.
/// `corr` holds one dense-output correction vector per step.
pub(crate) struct Run {
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
    pub corr: Vec<f64>,
    pub termination: Termination,
}

struct Rhs<'a, L: ?Sized> {
    system: &'a L,
    integrands: &'a [Integrand],
    n: usize,
}

impl<L: Lagrangian + ?Sized> Rhs<'_, L> {
    fn eval(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n;
        let (q, rest) = y.split_at(n);
        let qdot = &rest[..n];
        out[..n].copy_from_slice(qdot);
        let (head, tail) = out.split_at_mut(2 * n);
        self.system.accel(t, q, qdot, &mut head[n..]);
        let qddot = &head[n..];
        if qddot.iter().any(|a| !a.is_finite()) {
            return Err(Error::Evaluation {
                what: "acceleration",
                state: State::new(t, q.to_vec(), qdot.to_vec()),
            });
        }
        for (slot, integrand) in tail.iter_mut().zip(self.integrands) {
            *slot = integrand.eval(self.system, t, q, qdot, qddot)?;
        }
        Ok(())
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], dyn_len: usize, cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..dyn_len {
        let sc = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
        let r = err[i] / sc;
        acc += r * r;
    }
    (acc / dyn_len as f64).sqrt()
}

fn scaled_norm(v: &[f64], y: &[f64], dyn_len: usize, cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..dyn_len {
        let sc = cfg.atol + cfg.rtol * y[i].abs();
        let r = v[i] / sc;
        acc += r * r;
    }
    (acc / dyn_len as f64).sqrt()
}

fn phase_norm(y: &[f64], dyn_len: usize) -> f64 {
    y[..dyn_len].iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Effective end time after clipping to the open time domain.
fn clip_target<L: Lagrangian + ?Sized>(
    system: &L,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> (f64, bool) {
    let domain = system.time_domain();
    let margin = cfg.h_min.max(DOMAIN_MARGIN);
    if domain.lower.is_finite() && t_end <= domain.lower + margin {
        (domain.lower + margin, true)
    } else if domain.upper.is_finite() && t_end >= domain.upper - margin {
        (domain.upper - margin, true)
    } else {
        (t_end, false)
    }
}

fn initial_step<L: Lagrangian + ?Sized>(
    rhs: &Rhs<'_, L>,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    span: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let dyn_len = 2 * rhs.n;
    let d0 = scaled_norm(y0, y0, dyn_len, cfg);
    let d1 = scaled_norm(f0, y0, dyn_len, cfg);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    if rhs.eval(t0 + dir * h0, &y1, &mut f1).is_err() {
        return h0 * 1e-3;
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled_norm(&diff, y0, dyn_len, cfg) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates in one direction from `init` to `t_end`.
pub(crate) fn run<L: Lagrangian + ?Sized>(
    system: &L,
    init: &State,
    t_end: f64,
    cfg: &IntegratorConfig,
    integrands: &[Integrand],
) -> Result<Run> {
    cfg.validate()?;
    check_state(system, init)?;
    let n = system.dim();
    let m = integrands.len();
    let len = 2 * n + m;
    let dyn_len = 2 * n;
    let rhs = Rhs {
        system,
        integrands,
        n,
    };

    let (target, clipped) = clip_target(system, t_end, cfg);
    let mut y = vec![0.0; len];
    y[..n].copy_from_slice(&init.q);
    y[n..2 * n].copy_from_slice(&init.qdot);
    let mut k1 = vec![0.0; len];
    rhs.eval(init.t, &y, &mut k1)?;

    let mut out = Run {
        times: vec![init.t],
        y: y.clone(),
        dy: k1.clone(),
        corr: Vec::new(),
        termination: Termination::ReachedEnd,
    };
    let span = (target - init.t).abs();
    if span == 0.0 || (clipped && (target - init.t) * (t_end - init.t) <= 0.0) {
        out.termination = if clipped {
            Termination::ApproachedDomainBoundary
        } else {
            Termination::ReachedEnd
        };
        return Ok(out);
    }
    let dir = (target - init.t).signum();
    let h_max = cfg.h_max.unwrap_or(span).min(span);

    let mut h = match cfg.h_init {
        Some(h) => h.abs(),
        None => initial_step(&rhs, init.t, &y, &k1, dir, span, cfg),
    }
    .min(h_max);

    let mut t = init.t;
    let mut k = vec![vec![0.0; len]; 6];
    let mut ytmp = vec![0.0; len];
    let mut ynew = vec![0.0; len];
    let mut err = vec![0.0; len];
    let mut facold: f64 = 1e-4;
    let mut rejected_last = false;
    let mut steps = 0usize;
    const BETA: f64 = 0.04;
    const SAFETY: f64 = 0.9;
    const GROW: f64 = 5.0;
    const SHRINK: f64 = 0.2;
    let expo = 0.2 - BETA * 0.75;

    loop {
        let remaining = (target - t).abs();
        if remaining <= 1e-14 * t.abs().max(1.0) {
            out.termination = if clipped {
                Termination::ApproachedDomainBoundary
            } else {
                Termination::ReachedEnd
            };
            break;
        }
        if steps >= cfg.max_steps {
            out.termination = Termination::MaxSteps;
            break;
        }
        let mut last = false;
        if 1.01 * h >= remaining {
            h = remaining;
            last = true;
        }
        if h < cfg.h_min {
            out.termination = Termination::StepUnderflow;
            break;
        }
        steps += 1;
        let hs = dir * h;

        let stage = |k: &mut Vec<Vec<f64>>, ytmp: &mut Vec<f64>| -> Result<()> {
            for i in 0..len {
                ytmp[i] = y[i] + hs * A21 * k1[i];
            }
            rhs.eval(t + C[1] * hs, ytmp, &mut k[0])?;
            for i in 0..len {
                ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k[0][i]);
            }
            rhs.eval(t + C[2] * hs, ytmp, &mut k[1])?;
            for i in 0..len {
                ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k[0][i] + A43 * k[1][i]);
            }
            rhs.eval(t + C[3] * hs, ytmp, &mut k[2])?;
            for i in 0..len {
                ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k[0][i] + A53 * k[1][i] + A54 * k[2][i]);
            }
            rhs.eval(t + C[4] * hs, ytmp, &mut k[3])?;
            for i in 0..len {
                ytmp[i] = y[i]
                    + hs * (A61 * k1[i]
                        + A62 * k[0][i]
                        + A63 * k[1][i]
                        + A64 * k[2][i]
                        + A65 * k[3][i]);
            }
            rhs.eval(t + hs, ytmp, &mut k[4])?;
            Ok(())
        };

        let mut ok = stage(&mut k, &mut ytmp).is_ok();
        let t_new = if last { target } else { t + hs };
        if ok {
            for i in 0..len {
                ynew[i] = y[i]
                    + hs * (B1 * k1[i] + B3 * k[1][i] + B4 * k[2][i] + B5 * k[3][i] + B6 * k[4][i]);
            }
            ok = rhs.eval(t_new, &ynew, &mut k[5]).is_ok() && ynew.iter().all(|v| v.is_finite());
        }
        let err_norm = if ok {
            for i in 0..len {
                err[i] = hs
                    * (E1 * k1[i]
                        + E3 * k[1][i]
                        + E4 * k[2][i]
                        + E5 * k[3][i]
                        + E6 * k[4][i]
                        + E7 * k[5][i]);
            }
            error_norm(&err, &y, &ynew, dyn_len, cfg)
        } else {
            f64::NAN
        };

        if !err_norm.is_finite() {
            // a stage left the region where the system can be evaluated
            h *= SHRINK;
            rejected_last = true;
            if h < cfg.h_min {
                return Err(Error::Integration {
                    reason: format!("non-finite values near t = {t}"),
                    last: State::new(t, y[..n].to_vec(), y[n..2 * n].to_vec()),
                });
            }
            continue;
        }

        let fac11 = err_norm.powf(expo);
        if err_norm <= 1.0 {
            let mut fac = fac11 / facold.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / GROW, 1.0 / SHRINK);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            facold = err_norm.max(1e-4);
            for i in 0..len {
                out.corr.push(
                    hs * (D1 * k1[i]
                        + D3 * k[1][i]
                        + D4 * k[2][i]
                        + D5 * k[3][i]
                        + D6 * k[4][i]
                        + D7 * k[5][i]),
                );
            }
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            k1.copy_from_slice(&k[5]);
            out.times.push(t);
            out.y.extend_from_slice(&y);
            out.dy.extend_from_slice(&k1);
            rejected_last = false;
            h = h_new.min(h_max);
            if phase_norm(&y, dyn_len) > cfg.blowup_norm {
                out.termination = Termination::BlowUp;
                break;
            }
        } else {
            h /= (fac11 / SAFETY).min(1.0 / SHRINK);
            rejected_last = true;
        }
    }
    Ok(out)
}

/// Integrates from `init` to `t_end` (forward or backward in time).
pub fn integrate<L: Lagrangian + Clone>(
    system: &L,
    init: &State,
    t_end: f64,
    config: &IntegratorConfig,
    integrands: &[Integrand],
) -> Result<Trajectory<L>> {
    let run = run(system, init, t_end, config, integrands)?;
    let (back, fwd) = if t_end < init.t {
        (Some(run), None)
    } else {
        (None, Some(run))
    };
    Ok(Trajectory::from_runs(
        system.clone(),
        init.t,
        integrands.to_vec(),
        config.clone(),
        back,
        fwd,
    ))
}

/// Integrates backward to `t_back` and forward to `t_fwd` from the same
/// initial state and joins the two runs. Quadrature channels read
/// `∫_{init.t}^{t}` on both sides.
pub fn integrate_two_sided<L: Lagrangian + Clone>(
    system: &L,
    init: &State,
    t_back: f64,
    t_fwd: f64,
    config: &IntegratorConfig,
    integrands: &[Integrand],
) -> Result<Trajectory<L>> {
    if t_back > init.t || t_fwd < init.t {
        return Err(Error::Config(format!(
            "two-sided integration needs t_back <= {} <= t_fwd",
            init.t
        )));
    }
    let back = run(system, init, t_back, config, integrands)?;
    let fwd = run(system, init, t_fwd, config, integrands)?;
    Ok(Trajectory::from_runs(
        system.clone(),
        init.t,
        integrands.to_vec(),
        config.clone(),
        Some(back),
        Some(fwd),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Dissipative, LaneEmden, MaxwellBloch, Potential};

    fn free_damped() -> Dissipative {
        Dissipative::new(1, 1.0, Potential::Zero).unwrap()
    }

    #[test]
    fn damped_free_particle_closed_form() {
        let sys = free_damped();
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let tr = integrate(&sys, &init, 5.0, &IntegratorConfig::default(), &[]).unwrap();
        assert_eq!(tr.termination(), Termination::ReachedEnd);
        let end = tr.last_state();
        assert_eq!(end.t, 5.0);
        assert!((end.qdot[0] - (-5f64).exp()).abs() < 1e-9);
        assert!((end.q[0] - (1.0 - (-5f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn homoclinic_velocity_at_ten() {
        let init = State::new(0.0, vec![2.0, 0.0, 0.0], vec![0.0, 0.0, -1.0]);
        let tr = integrate(
            &MaxwellBloch,
            &init,
            10.0,
            &IntegratorConfig::default(),
            &[],
        )
        .unwrap();
        let sech = 1.0 / 10f64.cosh();
        assert!((tr.last_state().qdot[2] - (1.0 - 2.0 * sech * sech)).abs() < 1e-6);
    }

    #[test]
    fn lane_emden_n5_from_series_start() {
        let le = LaneEmden::new(5).unwrap();
        let init = lane_emden_series_start(5, 1.0, 1e-4).unwrap();
        let tr = integrate(&le, &init, 10.0, &IntegratorConfig::default(), &[]).unwrap();
        let exact = (1.0f64 + 100.0 / 3.0).powf(-0.5);
        assert!((tr.last_state().q[0] - exact).abs() < 1e-7);
    }

    #[test]
    fn backward_integration_is_stored_in_increasing_time() {
        let sys = free_damped();
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let tr = integrate(&sys, &init, -2.0, &IntegratorConfig::default(), &[]).unwrap();
        assert!(tr.times().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(tr.span(), (-2.0, 0.0));
        let s = tr.state_at(-2.0).unwrap();
        assert!((s.qdot[0] - 2f64.exp()).abs() < 1e-8 * 2f64.exp());
    }

    #[test]
    fn lane_emden_backward_stops_at_domain_margin() {
        let le = LaneEmden::new(1).unwrap();
        let init = State::new(1.0, vec![0.5], vec![0.1]);
        let cfg = IntegratorConfig {
            blowup_norm: f64::INFINITY,
            ..IntegratorConfig::default()
        };
        let tr = integrate(&le, &init, -1.0, &cfg, &[]).unwrap();
        assert_eq!(tr.termination(), Termination::ApproachedDomainBoundary);
        assert_eq!(tr.span().0, DOMAIN_MARGIN);
    }

    #[test]
    fn start_outside_domain_is_an_error() {
        let le = LaneEmden::new(1).unwrap();
        let init = State::new(0.0, vec![1.0], vec![0.0]);
        assert!(matches!(
            integrate(&le, &init, 1.0, &IntegratorConfig::default(), &[]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn even_lane_emden_blows_up() {
        let le = LaneEmden::new(2).unwrap();
        let init = State::new(1.0, vec![0.0], vec![20.0]);
        let tr = integrate(&le, &init, 1e3, &IntegratorConfig::default(), &[]).unwrap();
        assert_eq!(tr.termination(), Termination::BlowUp);
        assert!(tr.last_state().phase_norm() > 1e8);
        assert!(tr.last_state().phase_norm().is_finite());
    }

    #[test]
    fn max_steps_is_reported() {
        let sys = free_damped();
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let cfg = IntegratorConfig {
            max_steps: 3,
            ..IntegratorConfig::default()
        };
        let tr = integrate(&sys, &init, 5.0, &cfg, &[]).unwrap();
        assert_eq!(tr.termination(), Termination::MaxSteps);
        assert_eq!(tr.node_count(), 4);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let sys = free_damped();
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let cfg = IntegratorConfig::with_tolerances(0.0, 1e-12);
        assert!(matches!(
            integrate(&sys, &init, 1.0, &cfg, &[]),
            Err(Error::Config(_))
        ));
    }
}
