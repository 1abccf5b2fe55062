use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;

use super::drift::DriftReport;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub rtol: f64,
    pub atol: f64,
    pub drift: DriftReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub name: String,
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `log max_rel` against `log rtol`. `None` when every drift is
    /// at round-off level, so that no slope can be fitted.
    pub slope: Option<f64>,
}

/// Drifts below this are treated as exact.
pub const ROUNDOFF_DRIFT: f64 = 1e-14;

/// Runs `scenario` once per tolerance, with `atol = rtol · atol_ratio`.
pub fn convergence_study(
    name: &str,
    rtols: &[f64],
    atol_ratio: f64,
    mut scenario: impl FnMut(&IntegratorConfig) -> Result<DriftReport>,
) -> Result<ConvergenceTable> {
    if rtols.len() < 3 {
        return Err(Error::Config(
            "convergence study needs at least 3 tolerances".into(),
        ));
    }
    let (lo, hi) = rtols.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| {
        (lo.min(r), hi.max(r))
    });
    if !(lo > 0.0 && hi / lo >= 1e4) {
        return Err(Error::Config(
            "convergence tolerances must be positive and span at least 1e4".into(),
        ));
    }
    let mut rows = Vec::with_capacity(rtols.len());
    for &rtol in rtols {
        let cfg = IntegratorConfig::with_tolerances(rtol, rtol * atol_ratio);
        let drift = scenario(&cfg)?.with_config(&cfg);
        rows.push(ConvergenceRow {
            rtol,
            atol: cfg.atol,
            drift,
        });
    }
    let slope = if rows.iter().all(|r| r.drift.max_rel <= ROUNDOFF_DRIFT) {
        None
    } else {
        let xs: Vec<f64> = rows.iter().map(|r| r.rtol.ln()).collect();
        let ys: Vec<f64> = rows
            .iter()
            .map(|r| r.drift.max_rel.max(ROUNDOFF_DRIFT).ln())
            .collect();
        least_squares_slope(&xs, &ys)
    };
    Ok(ConvergenceTable {
        name: name.to_string(),
        rows,
        slope,
    })
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (sxx > 0.0 && slope.is_finite()).then_some(slope)
}
