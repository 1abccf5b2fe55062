use crate::lagrangian::NonlocalConstantSeries;

/// A named scalar time series anchored at `t0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub t0: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, t0: f64, times: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(times.len(), values.len());
        Self {
            name: name.into(),
            t0,
            times,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value at the sample closest to `t0`.
    pub fn anchor_value(&self) -> Option<f64> {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - self.t0).abs().total_cmp(&(b.1 - self.t0).abs()))
            .map(|(i, _)| self.values[i])
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self
    }
}

impl From<NonlocalConstantSeries> for Series {
    fn from(s: NonlocalConstantSeries) -> Self {
        Series {
            name: s.name,
            t0: s.t0,
            times: s.times,
            values: s.value,
        }
    }
}

impl From<&NonlocalConstantSeries> for Series {
    fn from(s: &NonlocalConstantSeries) -> Self {
        s.clone().into()
    }
}
