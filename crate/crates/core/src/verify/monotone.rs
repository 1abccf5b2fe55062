use crate::series::Series;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Nonnegative,
    Nonpositive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneReport {
    pub name: String,
    pub holds: bool,
    /// Largest violation found (0 when none).
    pub worst: f64,
    pub worst_time: Option<f64>,
    pub violations: usize,
}

impl MonotoneReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            holds: true,
            worst: 0.0,
            worst_time: None,
            violations: 0,
        }
    }

    fn record(&mut self, t: f64, excess: f64, tolerance: f64) {
        let excess = if excess.is_nan() {
            f64::INFINITY
        } else {
            excess
        };
        if excess > 0.0 && excess > self.worst {
            self.worst = excess;
            self.worst_time = Some(t);
        }
        if excess > tolerance {
            self.violations += 1;
            self.holds = false;
        }
    }
}

/// Checks consecutive samples, allowing backward steps up to `tolerance`.
pub fn check_monotone(series: &Series, direction: Direction, tolerance: f64) -> MonotoneReport {
    let mut report = MonotoneReport::new(&series.name);
    for i in 1..series.len() {
        let d = series.values[i] - series.values[i - 1];
        let excess = match direction {
            Direction::Nondecreasing => -d,
            Direction::Nonincreasing => d,
        };
        report.record(series.times[i], excess, tolerance);
    }
    report
}

/// Checks that every sample has the given sign, up to `tolerance`.
pub fn check_sign(series: &Series, sign: Sign, tolerance: f64) -> MonotoneReport {
    let mut report = MonotoneReport::new(&series.name);
    for (&t, &v) in series.times.iter().zip(&series.values) {
        let excess = match sign {
            Sign::Nonnegative => -v,
            Sign::Nonpositive => v,
        };
        report.record(t, excess, tolerance);
    }
    report
}
