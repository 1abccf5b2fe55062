//! A complete simulation request: system, initial state, family, span and
//! integrator settings.

use anyhow::Result;
use nonlocal::integrate::{lane_emden_series_start, DEFAULT_SERIES_EPSILON};
use nonlocal::systems::{
    Dissipative, LaneEmden, LaneEmdenConstant, MaxwellBloch, Potential, PotentialTable,
};
use nonlocal::{IntegratorConfig, State, VariationField, Warp};

use crate::config::{config_error, parse_list, Settings};

#[derive(Clone, Debug, PartialEq)]
pub enum System {
    Dissipative(Dissipative),
    LaneEmden(LaneEmden),
    MaxwellBloch,
}

impl System {
    pub fn id(&self) -> &'static str {
        match self {
            System::Dissipative(_) => "dissipative",
            System::LaneEmden(_) => "lane_emden",
            System::MaxwellBloch => "maxwell_bloch",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            System::Dissipative(s) => nonlocal::Lagrangian::dim(s),
            System::LaneEmden(_) => 1,
            System::MaxwellBloch => 3,
        }
    }
}

/// Parsed `family` value.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Null,
    /// `q(t + λ e^{rate t})`
    Exp {
        rate: f64,
    },
    /// `q(t + λ c t^p)`
    Power {
        coeff: f64,
        exponent: f64,
    },
    Scaling {
        alpha: Vec<f64>,
        beta: f64,
    },
    LaneEmden(LaneEmdenConstant),
}

impl Family {
    pub fn field(&self, system: &System) -> VariationField {
        match (self, system) {
            (Family::LaneEmden(c), System::LaneEmden(s)) => s.family(*c),
            (Family::Null, _) => VariationField::null(),
            (Family::Exp { rate }, _) => VariationField::time_shift(Warp::Exp { rate: *rate }),
            (Family::Power { coeff, exponent }, _) => VariationField::time_shift(Warp::Power {
                coeff: *coeff,
                exponent: *exponent,
            }),
            (Family::Scaling { alpha, beta }, _) => VariationField::scaling(alpha.clone(), *beta),
            (Family::LaneEmden(_), _) => unreachable!("checked when parsing"),
        }
    }

    fn parse(text: &str, system: &System) -> Result<Self> {
        let text = text.trim();
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (text, None),
        };
        let number = |s: &str| -> Result<f64> {
            match (s, system) {
                ("k", System::Dissipative(d)) => Ok(d.k()),
                ("-k", System::Dissipative(d)) => Ok(-d.k()),
                _ => s
                    .parse()
                    .map_err(|_| config_error(format!("family `{text}`: `{s}` is not a number"))),
            }
        };
        let bad = || config_error(format!("cannot parse family `{text}`"));
        match (head, rest) {
            ("null", None) => Ok(Family::Null),
            ("exp", Some(r)) => Ok(Family::Exp { rate: number(r)? }),
            ("power", Some(r)) => {
                let (c, p) = r.split_once(':').ok_or_else(bad)?;
                Ok(Family::Power {
                    coeff: number(c.trim())?,
                    exponent: number(p.trim())?,
                })
            }
            ("scaling", Some(r)) => {
                let (a, b) = match r.split_once(':') {
                    Some((a, b)) => (a, number(b.trim())?),
                    None => (r, 0.0),
                };
                let mut alpha = parse_list("family", a)?;
                let n = system.dim();
                if alpha.len() == 1 {
                    alpha = vec![alpha[0]; n];
                }
                if alpha.len() != n {
                    return Err(config_error(format!(
                        "family `{text}`: need 1 or {n} exponents, got {}",
                        alpha.len()
                    )));
                }
                Ok(Family::Scaling { alpha, beta: b })
            }
            ("nonuniform", Some(r)) if *system == System::MaxwellBloch => Ok(Family::Scaling {
                alpha: vec![1.0, 1.0, number(r)?],
                beta: 0.0,
            }),
            (name, None) if matches!(system, System::LaneEmden(_)) => Ok(Family::LaneEmden(
                name.parse().map_err(|e| config_error(format!("{e}")))?,
            )),
            _ => Err(bad()),
        }
    }

    fn default_for(system: &System) -> Self {
        match system {
            System::Dissipative(d) => Family::Exp { rate: d.k() },
            System::LaneEmden(_) => Family::LaneEmden(LaneEmdenConstant::Third),
            System::MaxwellBloch => Family::Scaling {
                alpha: vec![1.0, 1.0, -2.0],
                beta: 0.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub system: System,
    pub family: Family,
    pub init: State,
    pub t_end: f64,
    pub config: IntegratorConfig,
    /// Size of the uniform sample grid added to the accepted steps.
    pub samples: usize,
    pub seed: u64,
}

pub fn parse_system(id: &str) -> Result<&'static str> {
    match id {
        "dissipative" => Ok("dissipative"),
        "lane-emden" | "lane_emden" => Ok("lane_emden"),
        "maxwell-bloch" | "maxwell_bloch" => Ok("maxwell_bloch"),
        other => Err(config_error(format!(
            "unknown system `{other}` (expected dissipative, lane-emden or maxwell-bloch)"
        ))),
    }
}

/// Integrator settings from the `integrator.*` keys on top of the defaults.
pub fn integrator_config(s: &Settings) -> Result<IntegratorConfig> {
    let mut c = IntegratorConfig::default();
    if let Some(v) = s.parsed("integrator.rtol")? {
        c.rtol = v;
    }
    if let Some(v) = s.parsed("integrator.atol")? {
        c.atol = v;
    }
    c.h_init = s.parsed("integrator.h_init")?;
    if let Some(v) = s.parsed("integrator.h_min")? {
        c.h_min = v;
    }
    c.h_max = s.parsed("integrator.h_max")?;
    if let Some(v) = s.parsed("integrator.max_steps")? {
        c.max_steps = v;
    }
    if let Some(v) = s.parsed("integrator.blowup_norm")? {
        c.blowup_norm = v;
    }
    c.validate()?;
    Ok(c)
}

fn build_system(s: &Settings, init_len: Option<usize>) -> Result<System> {
    let id = parse_system(
        s.get("system")
            .ok_or_else(|| config_error("no system given"))?,
    )?;
    match id {
        "dissipative" => {
            let dim = match (s.parsed::<usize>("dissipative.dim")?, init_len) {
                (Some(d), _) => d,
                (None, Some(len)) if len % 2 == 0 => len / 2,
                (None, Some(len)) => {
                    return Err(config_error(format!(
                        "dissipative init needs q and qdot of equal length, got {len} values"
                    )))
                }
                (None, None) => return Err(config_error("dissipative system needs `init`")),
            };
            let k = s.parsed("dissipative.k")?.unwrap_or(1.0);
            let potential = match s.get("dissipative.potential").unwrap_or("zero") {
                "zero" => Potential::Zero,
                "quadratic" => Potential::Quadratic {
                    stiffness: s.parsed("dissipative.stiffness")?.unwrap_or(1.0),
                },
                "user-table" | "user_table" => {
                    let knots = s
                        .list("dissipative.table.knots")?
                        .ok_or_else(|| config_error("user-table needs dissipative.table.knots"))?;
                    let values = s
                        .list("dissipative.table.values")?
                        .ok_or_else(|| config_error("user-table needs dissipative.table.values"))?;
                    Potential::Table(PotentialTable::new(knots, values)?)
                }
                other => {
                    return Err(config_error(format!(
                        "unknown potential `{other}` (expected zero, quadratic or user-table)"
                    )))
                }
            };
            let sys = match s.parsed("dissipative.u_inf")? {
                Some(u_inf) => Dissipative::with_infimum(dim, k, potential, u_inf)?,
                None => Dissipative::new(dim, k, potential)?,
            };
            Ok(System::Dissipative(sys))
        }
        "lane_emden" => {
            let n = s.parsed("lane_emden.n")?.unwrap_or(5);
            Ok(System::LaneEmden(LaneEmden::new(n)?))
        }
        _ => Ok(System::MaxwellBloch),
    }
}

/// Initial state from `init`, or from `lane_emden.series_start = q0[, ε]`.
fn build_init(s: &Settings, system: &System, init: Option<Vec<f64>>) -> Result<State> {
    let t0_key = s.parsed::<f64>("t0")?;
    if let Some(spec) = s.get("lane_emden.series_start") {
        let System::LaneEmden(le) = system else {
            return Err(config_error(
                "lane_emden.series_start needs the lane-emden system",
            ));
        };
        if init.is_some() || t0_key.is_some() {
            return Err(config_error(
                "lane_emden.series_start replaces `init` and `t0`; give only one",
            ));
        }
        let v = parse_list("lane_emden.series_start", spec)?;
        let (q0, eps) = match v.as_slice() {
            [q0] => (*q0, DEFAULT_SERIES_EPSILON),
            [q0, eps] => (*q0, *eps),
            _ => {
                return Err(config_error(
                    "lane_emden.series_start is `q0` or `q0, epsilon`",
                ))
            }
        };
        return Ok(lane_emden_series_start(le.n(), q0, eps)?);
    }
    let values = init.ok_or_else(|| config_error("no initial state given (`init`)"))?;
    let t0 = t0_key.unwrap_or(match system {
        System::LaneEmden(_) => 1.0,
        _ => 0.0,
    });
    if !t0.is_finite() {
        return Err(config_error("t0 must be finite"));
    }
    if matches!(system, System::LaneEmden(_)) && (t0.is_nan() || t0 <= 0.0) {
        return Err(config_error(format!(
            "lane-emden needs t0 > 0 (got {t0}); use lane_emden.series_start to start near 0"
        )));
    }
    let n = system.dim();
    if *system == System::MaxwellBloch && values.len() == 5 {
        let q3 = s.parsed("maxwell_bloch.q3")?.unwrap_or(0.0);
        let xyz = [values[0], values[1], values[2], values[3], values[4]];
        return Ok(MaxwellBloch::embed(t0, xyz, q3));
    }
    if values.len() != 2 * n {
        let extra = if *system == System::MaxwellBloch {
            " (or 5 for x1,y1,x2,y2,z)"
        } else {
            ""
        };
        return Err(config_error(format!(
            "init needs {} values (q then qdot){extra}, got {}",
            2 * n,
            values.len()
        )));
    }
    Ok(State::new(t0, values[..n].to_vec(), values[n..].to_vec()))
}

impl Scenario {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let init_values = s.list("init")?;
        let system = build_system(s, init_values.as_ref().map(Vec::len))?;
        let init = build_init(s, &system, init_values)?;
        let family = match s.get("family") {
            Some(f) => Family::parse(f, &system)?,
            None => Family::default_for(&system),
        };
        let t_end: f64 = s
            .parsed("t_end")?
            .ok_or_else(|| config_error("no end time given (`t_end`)"))?;
        if !t_end.is_finite() {
            return Err(config_error("t_end must be finite"));
        }
        if matches!(system, System::LaneEmden(_)) && (t_end.is_nan() || t_end <= 0.0) {
            return Err(config_error("lane-emden needs t_end > 0"));
        }
        Ok(Scenario {
            system,
            family,
            init,
            t_end,
            config: integrator_config(s)?,
            samples: s.parsed("samples")?.unwrap_or(0),
            seed: s.parsed("seed")?.unwrap_or(0),
        })
    }
}
