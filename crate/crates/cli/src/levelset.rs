//! Level sets of `ψ_{E,B}` in the `(q̇₃, q̈₃)` plane as CSV.

use std::io::Write;

use anyhow::Result;
use nonlocal::lagrangian::acceleration;
use nonlocal::systems::MaxwellBloch;
use nonlocal::verify::suites::REFERENCE_WINDOW;
use nonlocal::verify::{level_set, LevelSetOptions, LevelSetPolyline};
use nonlocal::State;

use crate::config::{config_error, parse_list, Settings};

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetRequest {
    pub e: f64,
    pub b: f64,
    pub k: f64,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub options: LevelSetOptions,
}

impl LevelSetRequest {
    /// Reads `levelset.ebk` or, failing that, `init` (5 or 6 values).
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let mut options = LevelSetOptions::default();
        let (e, b, k) = match (s.list("levelset.ebk")?, s.list("init")?) {
            (Some(_), Some(_)) => {
                return Err(config_error("give either E,B,K or initial data, not both"))
            }
            (Some(v), None) => match v.as_slice() {
                [e, b, k] => (*e, *b, *k),
                _ => return Err(config_error("E,B,K needs three values")),
            },
            (None, Some(v)) => {
                let state = match v.len() {
                    5 => MaxwellBloch::embed(0.0, [v[0], v[1], v[2], v[3], v[4]], 0.0),
                    6 => State::new(0.0, v[..3].to_vec(), v[3..].to_vec()),
                    n => {
                        return Err(config_error(format!(
                            "initial data needs 5 or 6 values, got {n}"
                        )))
                    }
                };
                let fi = MaxwellBloch::first_integrals(&state)?;
                let qddot = acceleration(&MaxwellBloch, &state);
                options.initial = Some((state.qdot[2], qddot[2]));
                (fi.e, fi.b, fi.k)
            }
            (None, None) => return Err(config_error("need E,B,K or initial data")),
        };
        if !(e.is_finite() && b.is_finite() && k.is_finite()) {
            return Err(config_error("E, B and K must be finite"));
        }
        let (u_range, v_range) = match s.get("levelset.window") {
            None => REFERENCE_WINDOW,
            Some(w) => match parse_list("window", w)?.as_slice() {
                [u0, u1, v0, v1] => ((*u0, *u1), (*v0, *v1)),
                _ => return Err(config_error("window is `umin,umax,vmin,vmax`")),
            },
        };
        if let Some(g) = s.get("levelset.grid") {
            options.grid = parse_grid(g)?;
        }
        if let Some(p) = s.parsed::<bool>("levelset.polish")? {
            options.polish = p;
        }
        Ok(Self {
            e,
            b,
            k,
            u_range,
            v_range,
            options,
        })
    }

    pub fn run(&self) -> Result<Vec<LevelSetPolyline>> {
        Ok(level_set(
            self.e,
            self.b,
            self.k,
            self.u_range,
            self.v_range,
            &self.options,
        )?)
    }

    /// Slack on the stripe test: one grid cell along `u`.
    fn cell_u(&self) -> f64 {
        (self.u_range.1 - self.u_range.0) / (self.options.grid.0.max(2) - 1) as f64
    }

    /// One row per vertex: `u, v, component_id, in_stripe, accessible`.
    /// Closed components do not repeat their first vertex.
    pub fn write_csv(
        &self,
        lines: &[LevelSetPolyline],
        out: &mut dyn Write,
    ) -> std::io::Result<()> {
        writeln!(out, "u,v,component_id,in_stripe,accessible")?;
        let stripe = (2.0 * self.e).max(0.0).sqrt() + self.cell_u();
        for (id, line) in lines.iter().enumerate() {
            for &(u, v) in &line.points {
                writeln!(
                    out,
                    "{u:.16e},{v:.16e},{id},{},{}",
                    u8::from(u.abs() <= stripe),
                    u8::from(line.accessible)
                )?;
            }
        }
        Ok(())
    }
}

/// `N` or `NxM`.
pub fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || config_error(format!("grid `{text}` is not `N` or `NxM`"));
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match text.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(text)?;
            Ok((n, n))
        }
    }
}
