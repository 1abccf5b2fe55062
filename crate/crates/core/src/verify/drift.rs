use std::fmt;

use crate::integrate::IntegratorConfig;
use crate::series::Series;

/// How far a supposedly constant series wanders from its anchor value.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub name: String,
    /// Value at the sample nearest `t0`.
    pub anchor: f64,
    pub max_abs: f64,
    /// `max_abs / max(|anchor|, 1)`.
    pub max_rel: f64,
    pub t_max: f64,
    pub samples: usize,
    pub config: Option<IntegratorConfig>,
}

impl DriftReport {
    pub fn with_config(mut self, config: &IntegratorConfig) -> Self {
        self.config = Some(config.clone());
        self
    }
}

impl fmt::Display for DriftReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: C(t0)={:.6e} max_abs={:.3e} max_rel={:.3e} at t={:.6e} ({} samples",
            self.name, self.anchor, self.max_abs, self.max_rel, self.t_max, self.samples
        )?;
        if let Some(c) = &self.config {
            write!(f, ", rtol={:.0e} atol={:.0e}", c.rtol, c.atol)?;
        }
        f.write_str(")")
    }
}

/// Drift of a series relative to its value nearest `t0`. A non-finite
/// sample gives infinite drift.
pub fn drift(series: &Series) -> DriftReport {
    let anchor = series.anchor_value().unwrap_or(0.0);
    let mut max_abs = 0.0f64;
    let mut t_max = series.t0;
    for (&t, &v) in series.times.iter().zip(&series.values) {
        let d = (v - anchor).abs();
        let d = if d.is_nan() { f64::INFINITY } else { d };
        if d > max_abs {
            max_abs = d;
            t_max = t;
        }
    }
    DriftReport {
        name: series.name.clone(),
        anchor,
        max_abs,
        max_rel: max_abs / anchor.abs().max(1.0),
        t_max,
        samples: series.len(),
        config: None,
    }
}
