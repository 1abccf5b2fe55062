//! `verify`: the built-in suites, or the checks that apply to one scenario.

use anyhow::Result;
use nonlocal::integrate::{uniform_times, Termination};
use nonlocal::systems::{dissipative, lane_emden, maxwell_bloch, LaneEmdenConstant, MaxwellBloch};
use nonlocal::verify::suites::{run_criterion, Outcome, Suite, SuiteOptions};
use nonlocal::verify::{drift, DriftReport};
use nonlocal::{integrate, nonlocal_constant, Integrand, Lagrangian, Series, Trajectory};

use crate::scenario::{Family, Scenario, System};

/// Relative drift allowed for every constant of a scenario.
pub const SCENARIO_DRIFT_TOL: f64 = 1e-6;

/// Runs the criteria of a suite, one thread per criterion, and returns the
/// outcomes in criterion order.
pub fn run_suite_parallel(suite: Suite, options: &SuiteOptions) -> Vec<Outcome> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = suite
            .criteria()
            .into_iter()
            .map(|id| scope.spawn(move || run_criterion(id, suite, options)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion thread panicked"))
            .collect()
    })
}

/// One line of a scenario report.
#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Pass(String),
    Fail(String),
    /// Outside the hypotheses of a check; not a failure.
    Unsupported(String),
}

impl Check {
    pub fn failed(&self) -> bool {
        matches!(self, Check::Fail(_))
    }

    fn drift(report: DriftReport) -> Check {
        if report.max_rel < SCENARIO_DRIFT_TOL {
            Check::Pass(report.to_string())
        } else {
            Check::Fail(report.to_string())
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Check::Pass(s) => write!(f, "[ok] {s}"),
            Check::Fail(s) => write!(f, "[FAIL] {s}"),
            Check::Unsupported(s) => write!(f, "[unsupported] {s}"),
        }
    }
}

const SAMPLES: usize = 2001;

fn termination<L: Lagrangian>(tr: &Trajectory<L>) -> Check {
    match tr.termination() {
        Termination::ReachedEnd | Termination::ApproachedDomainBoundary => {
            Check::Pass(format!("integration {}", tr.termination()))
        }
        other => Check::Fail(format!(
            "integration stopped early ({other}) at t = {}",
            tr.last_state().t
        )),
    }
}

fn nonlocal_check<L: Lagrangian>(
    tr: &Trajectory<L>,
    sc: &Scenario,
    field: &nonlocal::VariationField,
) -> Result<Check> {
    let (a, b) = tr.span();
    let series: Series =
        nonlocal_constant(tr, field, sc.init.t, &uniform_times(a, b, SAMPLES))?.into();
    Ok(Check::drift(drift(&series).with_config(&sc.config)))
}

fn named(series: Series, name: &str, cfg: &nonlocal::IntegratorConfig) -> Check {
    let mut report = drift(&series).with_config(cfg);
    report.name = name.to_string();
    Check::drift(report)
}

/// Integrates the scenario and checks every constant it registers.
pub fn verify_scenario(sc: &Scenario) -> Result<Vec<Check>> {
    let field = sc.family.field(&sc.system);
    let mut integrands = vec![Integrand::Family(field.clone())];
    let t0 = sc.init.t;
    let cfg = &sc.config;
    let mut checks = Vec::new();
    match &sc.system {
        System::Dissipative(d) => {
            let rate = match sc.family {
                Family::Exp { rate } => Some(rate),
                _ => None,
            };
            integrands.extend(rate.map(|a| d.rearranged_integrand(a)));
            let tr = integrate(d, &sc.init, sc.t_end, cfg, &integrands)?;
            checks.push(termination(&tr));
            checks.push(nonlocal_check(&tr, sc, &field)?);
            if let Some(a) = rate {
                let s = dissipative::rearranged_constant(&tr, a, t0)?;
                checks.push(named(s, &format!("rearranged_constant[a={a}]"), cfg));
            }
        }
        System::LaneEmden(le) => {
            integrands.extend(le.integrands());
            let tr = integrate(le, &sc.init, sc.t_end, cfg, &integrands)?;
            checks.push(termination(&tr));
            checks.push(nonlocal_check(&tr, sc, &field)?);
            for c in LaneEmdenConstant::ALL {
                checks.push(named(lane_emden::constant(&tr, c, t0)?, c.id(), cfg));
            }
            let (a, b) = tr.span();
            let window = ((b / 100.0).max(10.0).max(a), b);
            let n = le.n();
            if n % 2 == 0 || n < 5 {
                checks.push(Check::Unsupported(format!(
                    "asymptotics: the decay estimates need odd n >= 5, got n = {n}"
                )));
            } else if 10.0 * window.0 > b {
                checks.push(Check::Unsupported(format!(
                    "asymptotics: need a decade of t >= 10, span is [{a}, {b}]"
                )));
            } else {
                let asy = lane_emden::asymptotics(&tr, window)?;
                let line = format!(
                    "asymptotics on [{}, {}]: c3 = {:.3e}, c4 = {:.3e}, |q| envelope slope {:?}",
                    window.0, window.1, asy.c3, asy.c4, asy.q_exponent
                );
                checks.push(if asy.chain_holds {
                    Check::Pass(line)
                } else {
                    Check::Fail(line)
                });
            }
        }
        System::MaxwellBloch => {
            integrands.push(MaxwellBloch::qdot3_sq_integrand());
            let tr = integrate(&MaxwellBloch, &sc.init, sc.t_end, cfg, &integrands)?;
            checks.push(termination(&tr));
            checks.push(nonlocal_check(&tr, sc, &field)?);
            checks.push(named(
                maxwell_bloch::rearranged_constant(&tr, t0)?,
                "rearranged_constant",
                cfg,
            ));
            let mut fi = vec![Vec::new(); 3];
            for i in 0..tr.node_count() {
                let f = MaxwellBloch::first_integrals(&tr.node_state(i))?;
                for (col, v) in fi.iter_mut().zip([f.e, f.b, f.j]) {
                    col.push(v);
                }
            }
            for (name, values) in ["E", "B", "J"].into_iter().zip(fi) {
                let s = Series::new(name, t0, tr.times().to_vec(), values);
                checks.push(named(s, name, cfg));
            }
        }
    }
    Ok(checks)
}
