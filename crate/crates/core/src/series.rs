use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled real observable with optional per-sample standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::with_stderr(times, values, None)
    }

    pub fn with_stderr(times: Vec<f64>, values: Vec<f64>, stderr: Option<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(
                "values",
                format!("{} values for {} times", values.len(), times.len()),
            ));
        }
        if let Some(se) = &stderr {
            if se.len() != times.len() {
                return Err(Error::invalid("stderr", "length differs from times"));
            }
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("times", "must be strictly increasing"));
        }
        Ok(Self {
            times,
            values,
            stderr,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Mean spacing of the sample times.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            return f64::INFINITY;
        }
        (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
    }

    /// Value at `t` by linear interpolation (clamped at the ends).
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 0 {
            return f64::NAN;
        }
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let i = self.times.partition_point(|&x| x <= t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}
