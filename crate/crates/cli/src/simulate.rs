//! Trajectory tables: integrate a scenario and tabulate the state, the
//! registered constants and their quadrature channels.

use std::io::Write;

use anyhow::Result;
use nonlocal::integrate::{uniform_times, Termination};
use nonlocal::lagrangian::{acceleration, boundary_term};
use nonlocal::systems::{maxwell_bloch, LaneEmdenConstant, MaxwellBloch};
use nonlocal::{integrate, Integrand, Lagrangian, State};

use crate::scenario::{Family, Scenario, System};

type Eval = Box<dyn Fn(&State, &[f64]) -> Result<Vec<f64>>>;

/// Constant columns of a scenario and how to recompute them.
///
/// Every constant is a function of the row state and of the quadrature
/// channels `∫_{t0}^{t}` written next to it, so a table can be checked row
/// by row without re-integrating.
pub struct Columns {
    pub constants: Vec<String>,
    pub channels: Vec<String>,
    integrands: Vec<Integrand>,
    eval: Eval,
}

impl Columns {
    pub fn new(sc: &Scenario) -> Result<Self> {
        let field = sc.family.field(&sc.system);
        let mut integrands = vec![Integrand::Family(field.clone()), Integrand::Action];
        let mut channels = vec!["int.C".to_string(), "action".to_string()];
        let mut constants = vec!["C".to_string()];
        let eval: Eval = match &sc.system {
            System::Dissipative(d) => {
                constants.extend(["energy".into(), "dissipative_energy".into()]);
                let rate = match sc.family {
                    Family::Exp { rate } => {
                        integrands.push(d.rearranged_integrand(rate));
                        channels.push("int.rearranged_constant".into());
                        constants.push("rearranged_constant".into());
                        Some(rate)
                    }
                    _ => None,
                };
                let sys = d.clone();
                Box::new(move |s, acc| {
                    let a = acceleration(&sys, s);
                    let mut v = vec![
                        boundary_term(&sys, &field, s, &a)? - acc[0],
                        sys.energy(&s.q, &s.qdot),
                        sys.dissipative_energy(s.t, &s.q, &s.qdot),
                    ];
                    if let Some(rate) = rate {
                        v.push(sys.rearranged_constant_at(rate, s, acc[2]));
                    }
                    Ok(v)
                })
            }
            System::LaneEmden(le) => {
                constants.push("energy".into());
                for c in LaneEmdenConstant::ALL {
                    integrands.push(le.integrand(c));
                    channels.push(format!("int.{}", c.id()));
                    constants.push(c.id().into());
                }
                let sys = le.clone();
                let anchor = sc.init.clone();
                Box::new(move |s, acc| {
                    let a = acceleration(&sys, s);
                    let mut v = vec![
                        boundary_term(&sys, &field, s, &a)? - acc[0],
                        sys.energy(s.q[0], s.qdot[0]),
                    ];
                    for (i, c) in LaneEmdenConstant::ALL.into_iter().enumerate() {
                        v.push(sys.constant_at(c, &anchor, s, &a, acc[2 + i])?);
                    }
                    Ok(v)
                })
            }
            System::MaxwellBloch => {
                constants.extend(["E", "B", "J", "K", "rearranged_constant"].map(String::from));
                integrands.push(MaxwellBloch::qdot3_sq_integrand());
                channels.push("int.qdot3_sq".into());
                let e0 = MaxwellBloch::first_integrals(&sc.init)?.e;
                Box::new(move |s, acc| {
                    let a = acceleration(&MaxwellBloch, s);
                    let fi = MaxwellBloch::first_integrals(s)?;
                    Ok(vec![
                        boundary_term(&MaxwellBloch, &field, s, &a)? - acc[0],
                        fi.e,
                        fi.b,
                        fi.j,
                        fi.k,
                        maxwell_bloch::rearranged_constant_at(s, e0, acc[2]),
                    ])
                })
            }
        };
        Ok(Columns {
            constants,
            channels,
            integrands,
            eval,
        })
    }

    /// Constant columns at `state`, given the channel values of the same row.
    pub fn eval(&self, state: &State, channels: &[f64]) -> Result<Vec<f64>> {
        (self.eval)(state, channels)
    }
}

/// A simulated trajectory in tabular form.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub termination: Termination,
    pub span: (f64, f64),
}

pub fn simulate(sc: &Scenario) -> Result<Table> {
    let cols = Columns::new(sc)?;
    match &sc.system {
        System::Dissipative(d) => tabulate(d, sc, &cols),
        System::LaneEmden(le) => tabulate(le, sc, &cols),
        System::MaxwellBloch => tabulate(&MaxwellBloch, sc, &cols),
    }
}

fn tabulate<L: Lagrangian + Clone>(sys: &L, sc: &Scenario, cols: &Columns) -> Result<Table> {
    let n = sys.dim();
    let tr = integrate(sys, &sc.init, sc.t_end, &sc.config, &cols.integrands)?;
    let (a, b) = tr.span();
    log::info!(
        "{} nodes on [{a}, {b}], termination {}",
        tr.node_count(),
        tr.termination()
    );

    // accepted steps plus the uniform grid, merged; grid points that land
    // on a node are not repeated
    let (lo, hi) = (sc.init.t.min(sc.t_end), sc.init.t.max(sc.t_end));
    let grid: Vec<f64> = if sc.samples > 0 && hi > lo {
        uniform_times(lo, hi, sc.samples)
            .into_iter()
            .filter(|t| (a..=b).contains(t))
            .collect()
    } else {
        Vec::new()
    };
    let nodes = tr.times();
    let mut rows = Vec::with_capacity(nodes.len() + grid.len());
    let (mut i, mut j) = (0, 0);
    while i < nodes.len() || j < grid.len() {
        let sample = if j >= grid.len() || (i < nodes.len() && nodes[i] <= grid[j]) {
            if j < grid.len() && nodes[i] == grid[j] {
                j += 1;
            }
            i += 1;
            tr.node_sample(i - 1)
        } else {
            j += 1;
            tr.eval(grid[j - 1])?
        };
        let s = &sample.state;
        let mut row = Vec::with_capacity(1 + 2 * n + cols.constants.len() + cols.channels.len());
        row.push(s.t);
        row.extend_from_slice(&s.q);
        row.extend_from_slice(&s.qdot);
        row.extend(cols.eval(s, &sample.acc)?);
        row.extend_from_slice(&sample.acc);
        rows.push(row);
    }

    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("q_{i}")));
    header.extend((1..=n).map(|i| format!("qdot_{i}")));
    header.extend(cols.constants.iter().cloned());
    header.extend(cols.channels.iter().cloned());
    Ok(Table {
        header,
        rows,
        termination: tr.termination(),
        span: (a, b),
    })
}

/// Writes a table as CSV with 17 significant digits per value.
pub fn write_csv(table: &Table, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", table.header.join(","))?;
    let mut line = String::new();
    for row in &table.rows {
        line.clear();
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
