use serde::Serialize;

use crate::error::{Error, Result};

/// Sorted sample of percent inaccuracies with ECDF and quantile evaluation.
///
/// Ties are kept, so repeated outcomes carry proportionally more weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    sorted_values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::DegenerateSample(format!(
                "an empirical distribution needs at least 2 values, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite observation {bad}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution {
            sorted_values: values,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted_values
    }

    pub fn min(&self) -> f64 {
        self.sorted_values[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted_values[self.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.sorted_values.iter().sum::<f64>() / self.len() as f64
    }

    /// Fraction of values `<= x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        let below = self.sorted_values.partition_point(|v| *v <= x);
        below as f64 / self.len() as f64
    }

    /// Fraction of values strictly greater than `x`.
    pub fn exceedance(&self, x: f64) -> f64 {
        1.0 - self.ecdf(x)
    }

    /// Linear interpolation between order statistics at position
    /// `h = (n - 1) q`. Never extrapolates past the sample extremes.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("quantile level {q} outside [0, 1]")));
        }
        let v = &self.sorted_values;
        let h = (v.len() - 1) as f64 * q;
        let lo = h.floor() as usize;
        if lo + 1 >= v.len() {
            return Ok(v[v.len() - 1]);
        }
        let frac = h - lo as f64;
        if frac == 0.0 {
            return Ok(v[lo]);
        }
        Ok(v[lo] + frac * (v[lo + 1] - v[lo]))
    }

    /// `(q, quantile)` pairs at q = 0.00, 0.01, ..., 1.00.
    pub fn quantile_grid(&self) -> Vec<(f64, f64)> {
        (0..=100)
            .map(|i| {
                let q = i as f64 / 100.0;
                (q, self.quantile(q).expect("grid level in [0, 1]"))
            })
            .collect()
    }

    /// Equal-width histogram over `[min, max]` as `(bin_lo, bin_hi, count)`.
    /// The last bin is closed on the right.
    pub fn histogram(&self, bins: usize) -> Result<Vec<(f64, f64, usize)>> {
        if bins == 0 {
            return Err(Error::domain("histogram needs at least one bin"));
        }
        let (lo, hi) = (self.min(), self.max());
        if lo == hi {
            return Ok(vec![(lo, hi, self.len())]);
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for v in &self.sorted_values {
            let idx = (((v - lo) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let b_lo = lo + i as f64 * width;
                let b_hi = if i + 1 == bins {
                    hi
                } else {
                    lo + (i + 1) as f64 * width
                };
                (b_lo, b_hi, c)
            })
            .collect())
    }

    /// Adds `c` to every value.
    pub fn shifted(&self, c: f64) -> EmpiricalDistribution {
        EmpiricalDistribution {
            sorted_values: self.sorted_values.iter().map(|v| v + c).collect(),
        }
    }
}
