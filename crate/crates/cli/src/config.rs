//! Flat `key = value` settings with dotted keys.
//!
//! ```text
//! # damped oscillator
//! system = dissipative
//! dissipative.k = 0.5
//! dissipative.potential = quadratic
//! init = 1, -0.5, 0.3, 0.8
//! t_end = 10
//! integrator.rtol = 1e-9
//! ```
//!
//! Blank lines and `#` comments are ignored. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Invalid user input; reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Every key the tools understand.
pub const KNOWN_KEYS: &[&str] = &[
    "system",
    "family",
    "init",
    "t0",
    "t_end",
    "samples",
    "seed",
    "integrator.rtol",
    "integrator.atol",
    "integrator.h_init",
    "integrator.h_min",
    "integrator.h_max",
    "integrator.max_steps",
    "integrator.blowup_norm",
    "dissipative.k",
    "dissipative.dim",
    "dissipative.potential",
    "dissipative.stiffness",
    "dissipative.u_inf",
    "dissipative.table.knots",
    "dissipative.table.values",
    "lane_emden.n",
    "lane_emden.series_start",
    "maxwell_bloch.q3",
    "levelset.ebk",
    "levelset.window",
    "levelset.grid",
    "levelset.polish",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut settings = Settings::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(format!("line {}: expected `key = value`", no + 1)))?;
            let key = key.trim();
            if settings.map.contains_key(key) {
                return Err(config_error(format!(
                    "line {}: duplicate key `{key}`",
                    no + 1
                )));
            }
            settings.set(key, value.trim())?;
        }
        Ok(settings)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets a key, replacing any previous value.
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(config_error(format!("unknown key `{key}`")));
        }
        self.map.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl ToString>) -> anyhow::Result<()> {
        match value {
            Some(v) => self.set(key, &v.to_string()),
            None => Ok(()),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> anyhow::Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| config_error(format!("`{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn list(&self, key: &str) -> anyhow::Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }
}

pub fn parse_list(what: &str, text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map_err(|_| config_error(format!("`{what}`: `{s}` is not a number")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let s =
            Settings::parse("# x\nsystem = dissipative  # trailing\n\ninit = 1, 2,3 ,4\n").unwrap();
        assert_eq!(s.get("system"), Some("dissipative"));
        assert_eq!(s.list("init").unwrap(), Some(vec![1.0, 2.0, 3.0, 4.0]));
        assert_eq!(s.list("t0").unwrap(), None);
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["system dissipative", "colour = red", "t0 = 1\nt0 = 2"] {
            let err = Settings::parse(text).unwrap_err();
            assert!(err.downcast_ref::<ConfigError>().is_some(), "{text}");
        }
        let s = Settings::parse("t0 = abc").unwrap();
        assert!(s.parsed::<f64>("t0").is_err());
    }
}
