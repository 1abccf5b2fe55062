use crate::error::{Error, Result};
use crate::lagrangian::{acceleration, Lagrangian, State, VariationField};

use super::{Integrand, IntegratorConfig, Run, Termination};

/// Dense solution of a Lagrangian system.
///
/// Nodes are the accepted integrator steps in increasing time order. Each
/// node stores the augmented vector `(q, q̇, I_1..I_m)` and its derivative
/// `(q̇, q̈, M_1..M_m)`; between nodes the integrator's fourth-order
/// continuous extension is used, which is the cubic Hermite interpolant
/// plus `s²(1−s)²` times a per-step correction. Interpolated `q̈` comes
/// from `accel`.
#[derive(Clone)]
pub struct Trajectory<L> {
    system: L,
    dim: usize,
    anchor: f64,
    integrands: Vec<Integrand>,
    config: IntegratorConfig,
    times: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
    corr: Vec<f64>,
    stride: usize,
    backward: Option<Termination>,
    forward: Option<Termination>,
}

/// Everything known about the solution at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub state: State,
    pub qddot: Vec<f64>,
    /// Quadrature channels, `∫_{anchor}^{t}`.
    pub acc: Vec<f64>,
}

impl<L: Lagrangian> Trajectory<L> {
    pub(crate) fn from_runs(
        system: L,
        anchor: f64,
        integrands: Vec<Integrand>,
        config: IntegratorConfig,
        backward: Option<Run>,
        forward: Option<Run>,
    ) -> Self {
        let dim = system.dim();
        let stride = 2 * dim + integrands.len();
        let mut times = Vec::new();
        let mut y = Vec::new();
        let mut dy = Vec::new();
        let mut corr = Vec::new();
        let back_term = backward.as_ref().map(|r| r.termination);
        let fwd_term = forward.as_ref().map(|r| r.termination);
        if let Some(run) = &backward {
            for i in (0..run.times.len()).rev() {
                times.push(run.times[i]);
                y.extend_from_slice(&run.y[i * stride..(i + 1) * stride]);
                dy.extend_from_slice(&run.dy[i * stride..(i + 1) * stride]);
            }
            // the correction term is symmetric under reversing a step
            for j in (0..run.times.len() - 1).rev() {
                corr.extend_from_slice(&run.corr[j * stride..(j + 1) * stride]);
            }
        }
        if let Some(run) = &forward {
            let skip = usize::from(backward.is_some());
            for i in skip..run.times.len() {
                times.push(run.times[i]);
                y.extend_from_slice(&run.y[i * stride..(i + 1) * stride]);
                dy.extend_from_slice(&run.dy[i * stride..(i + 1) * stride]);
            }
            corr.extend_from_slice(&run.corr);
        }
        Self {
            system,
            dim,
            anchor,
            integrands,
            config,
            times,
            y,
            dy,
            corr,
            stride,
            backward: back_term,
            forward: fwd_term,
        }
    }

    pub fn system(&self) -> &L {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn integrands(&self) -> &[Integrand] {
        &self.integrands
    }

    /// Time of the initial state; quadrature channels vanish there.
    pub fn anchor_time(&self) -> f64 {
        self.anchor
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn node_count(&self) -> usize {
        self.times.len()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Termination of a one-directional run, or the worse of the two sides.
    pub fn termination(&self) -> Termination {
        match (self.backward, self.forward) {
            (Some(b), Some(f)) if b != Termination::ReachedEnd => {
                if f == Termination::ReachedEnd {
                    b
                } else {
                    f
                }
            }
            (_, Some(f)) => f,
            (Some(b), None) => b,
            (None, None) => Termination::ReachedEnd,
        }
    }

    pub fn backward_termination(&self) -> Option<Termination> {
        self.backward
    }

    pub fn forward_termination(&self) -> Option<Termination> {
        self.forward
    }

    fn row(&self, i: usize) -> (&[f64], &[f64]) {
        let r = i * self.stride..(i + 1) * self.stride;
        (&self.y[r.clone()], &self.dy[r])
    }

    pub fn node_state(&self, i: usize) -> State {
        let (y, _) = self.row(i);
        let n = self.dim;
        State::new(self.times[i], y[..n].to_vec(), y[n..2 * n].to_vec())
    }

    pub fn node_qddot(&self, i: usize) -> &[f64] {
        let n = self.dim;
        &self.row(i).1[n..2 * n]
    }

    pub fn node_sample(&self, i: usize) -> Sample {
        let (y, dy) = self.row(i);
        let n = self.dim;
        Sample {
            state: State::new(self.times[i], y[..n].to_vec(), y[n..2 * n].to_vec()),
            qddot: dy[n..2 * n].to_vec(),
            acc: y[2 * n..].to_vec(),
        }
    }

    pub fn first_state(&self) -> State {
        self.node_state(0)
    }

    pub fn last_state(&self) -> State {
        self.node_state(self.times.len() - 1)
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let (start, end) = self.span();
        if t >= start && t <= end {
            Ok(())
        } else {
            Err(Error::OutOfRange { t, start, end })
        }
    }

    /// Index of the segment `[t_i, t_{i+1}]` holding `t`, or `Err(i)` when
    /// `t` is exactly node `i`.
    fn locate(&self, t: f64) -> std::result::Result<usize, usize> {
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => Err(i),
            Err(i) => Ok(i - 1),
        }
    }

    fn hermite(&self, seg: usize, t: f64, out: &mut [f64]) {
        let (ya, fa) = self.row(seg);
        let (yb, fb) = self.row(seg + 1);
        let ta = self.times[seg];
        let h = self.times[seg + 1] - ta;
        let s = (t - ta) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let w = s2 * (1.0 - s) * (1.0 - s);
        let corr = &self.corr[seg * self.stride..(seg + 1) * self.stride];
        for i in 0..self.stride {
            out[i] = h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i] + w * corr[i];
        }
    }

    /// Dense evaluation; exact at node times.
    pub fn eval(&self, t: f64) -> Result<Sample> {
        self.check_range(t)?;
        match self.locate(t) {
            Err(i) => Ok(self.node_sample(i)),
            Ok(seg) => {
                let mut buf = vec![0.0; self.stride];
                self.hermite(seg, t, &mut buf);
                let n = self.dim;
                let state = State::new(t, buf[..n].to_vec(), buf[n..2 * n].to_vec());
                let qddot = acceleration(&self.system, &state);
                Ok(Sample {
                    state,
                    qddot,
                    acc: buf[2 * n..].to_vec(),
                })
            }
        }
    }

    pub fn state_at(&self, t: f64) -> Result<State> {
        Ok(self.eval(t)?.state)
    }

    /// Channel registered for `field`: the same handle if present,
    /// otherwise a family with an identical descriptor.
    pub fn channel_of_family(&self, field: &VariationField) -> Option<usize> {
        let by_identity = self.integrands.iter().position(|ig| match ig {
            Integrand::Family(f) => f.same_as(field),
            _ => false,
        });
        by_identity.or_else(|| {
            let name = field.descriptor();
            self.integrands.iter().position(|ig| match ig {
                Integrand::Family(f) => f.descriptor() == name,
                _ => false,
            })
        })
    }

    pub fn channel_named(&self, name: &str) -> Option<usize> {
        self.integrands.iter().position(|ig| ig.name() == name)
    }

    pub fn action_channel(&self) -> Option<usize> {
        self.integrands
            .iter()
            .position(|ig| matches!(ig, Integrand::Action))
    }

    /// Channel value `∫_{anchor}^{t}` at a time.
    pub fn accumulated(&self, channel: usize, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.acc[channel])
    }

    /// Values of a channel at every node.
    pub fn node_channel(&self, channel: usize) -> Vec<f64> {
        let off = 2 * self.dim + channel;
        (0..self.times.len())
            .map(|i| self.y[i * self.stride + off])
            .collect()
    }
}

/// `count` evenly spaced times covering `[a, b]`, endpoints included.
pub fn uniform_times(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, integrate_two_sided};
    use crate::systems::{Dissipative, MaxwellBloch, Potential};

    #[test]
    fn nodes_reproduce_exactly_and_satisfy_accel() {
        let init = State::new(0.0, vec![1.0, 0.5, 0.0], vec![0.2, -0.3, 0.7]);
        let tr = integrate(&MaxwellBloch, &init, 3.0, &IntegratorConfig::default(), &[]).unwrap();
        for i in 0..tr.node_count() {
            let s = tr.eval(tr.times()[i]).unwrap();
            assert_eq!(s.state, tr.node_state(i));
            let a = acceleration(&MaxwellBloch, &s.state);
            assert_eq!(a.as_slice(), tr.node_qddot(i));
        }
    }

    #[test]
    fn out_of_range_evaluation() {
        let init = State::new(0.0, vec![1.0, 0.5, 0.0], vec![0.2, -0.3, 0.7]);
        let tr = integrate(&MaxwellBloch, &init, 1.0, &IntegratorConfig::default(), &[]).unwrap();
        assert!(matches!(tr.eval(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(tr.eval(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn dense_output_tracks_closed_form() {
        let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let tr = integrate(&sys, &init, 4.0, &IntegratorConfig::default(), &[]).unwrap();
        for t in uniform_times(0.0, 4.0, 97) {
            let s = tr.state_at(t).unwrap();
            assert!((s.qdot[0] - (-t).exp()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn two_sided_channels_share_anchor() {
        let sys = Dissipative::new(1, 1.0, Potential::Zero).unwrap();
        let init = State::new(0.0, vec![0.0], vec![1.0]);
        let ch = Integrand::scalar("one", |_, _, _| 1.0);
        let tr = integrate_two_sided(&sys, &init, -1.0, 2.0, &IntegratorConfig::default(), &[ch])
            .unwrap();
        assert_eq!(tr.span(), (-1.0, 2.0));
        assert!(tr.times().windows(2).all(|w| w[0] < w[1]));
        assert!((tr.accumulated(0, -1.0).unwrap() + 1.0).abs() < 1e-14);
        assert!((tr.accumulated(0, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(tr.accumulated(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_times(1.0, 2.0, 5);
        assert_eq!(g, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!(uniform_times(0.0, 1.0, 0).is_empty());
    }
}
