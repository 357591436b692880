//! Risk-targeted uplifts and reference class forecasts for a candidate
//! project.
//!
//! The uplift for an acceptable overrun risk `r` is read from the reference
//! class at level `1 - r`. Linear interpolation between order statistics can
//! land below the point where at most `r` of the class exceeds the budget
//! (small classes, awkward `r`), so the uplift is raised to the smallest
//! order statistic that keeps the empirical exceedance at or below `r`.
//! Whenever the interpolated quantile already honours that bound, which
//! includes every level where `(n - 1)(1 - r)` is an integer, the uplift is
//! exactly `quantile(1 - r)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::refclass::EmpiricalDistribution;

pub const DEFAULT_COVERAGE: f64 = 0.8;

fn check_risk(acceptable_risk: f64) -> Result<()> {
    if acceptable_risk.is_nan() || acceptable_risk > 1.0 {
        return Err(Error::domain(format!(
            "acceptable risk {acceptable_risk} outside (0, 1]"
        )));
    }
    if acceptable_risk <= 0.0 {
        return Err(Error::ZeroRisk);
    }
    Ok(())
}

/// Smallest sample value with at most `floor(n r)` values strictly above it.
fn exceedance_floor(dist: &EmpiricalDistribution, acceptable_risk: f64) -> f64 {
    let n = dist.len();
    let mut allowed = ((n as f64) * acceptable_risk).floor() as usize;
    while allowed > 0 && allowed as f64 / n as f64 > acceptable_risk {
        allowed -= 1;
    }
    if allowed >= n {
        return f64::NEG_INFINITY;
    }
    dist.values()[n - 1 - allowed]
}

/// Percent uplift such that at most `acceptable_risk` of the reference class
/// would have overrun the uplifted budget.
///
/// A risk of zero is rejected: no finite sample supports a guarantee beyond
/// its own maximum.
pub fn required_uplift(dist: &EmpiricalDistribution, acceptable_risk: f64) -> Result<f64> {
    check_risk(acceptable_risk)?;
    let q = dist.quantile(1.0 - acceptable_risk)?;
    Ok(q.max(exceedance_floor(dist, acceptable_risk)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpliftPoint {
    pub acceptable_risk: f64,
    pub uplift: f64,
}

/// Required uplift as a function of acceptable risk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpliftSchedule {
    pub points: Vec<UpliftPoint>,
    pub source: String,
}

impl UpliftSchedule {
    /// Uplift at `risk`, linearly interpolated between schedule points and
    /// clamped to the end points outside the grid.
    pub fn uplift_at(&self, risk: f64) -> f64 {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.acceptable_risk.total_cmp(&b.acceptable_risk));
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if risk <= first.acceptable_risk {
            return first.uplift;
        }
        if risk >= last.acceptable_risk {
            return last.uplift;
        }
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if risk <= b.acceptable_risk {
                let t = (risk - a.acceptable_risk) / (b.acceptable_risk - a.acceptable_risk);
                return a.uplift + t * (b.uplift - a.uplift);
            }
        }
        last.uplift
    }

    /// Absolute uplifts on `base`, in the same currency units.
    pub fn monetized(&self, base: f64) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.acceptable_risk, base * p.uplift / 100.0))
            .collect()
    }
}

pub fn uplift_schedule(
    dist: &EmpiricalDistribution,
    risk_grid: &[f64],
    source: &str,
) -> Result<UpliftSchedule> {
    if risk_grid.is_empty() {
        return Err(Error::domain("empty risk grid"));
    }
    let points = risk_grid
        .iter()
        .map(|&r| {
            Ok(UpliftPoint {
                acceptable_risk: r,
                uplift: required_uplift(dist, r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UpliftSchedule {
        points,
        source: source.to_string(),
    })
}

/// Risk grid 0.01, 0.02, ..., 1.00 for plotting uplift curves.
pub fn default_risk_grid() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

/// A base estimate re-read against a reference class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastAdjustment {
    pub reference_class: String,
    pub n: usize,
    pub base_estimate: f64,
    pub acceptable_risk: f64,
    pub uplift: f64,
    pub adjusted_estimate: f64,
    /// The class median applied to the base: the most likely outcome.
    pub median_uplift: f64,
    pub most_likely_estimate: f64,
    pub coverage: f64,
    pub interval: (f64, f64),
}

/// Uplifts `base_estimate` for `acceptable_risk` and widens it to the central
/// `coverage` interval of the class outcomes.
pub fn reference_class_forecast(
    base_estimate: f64,
    dist: &EmpiricalDistribution,
    acceptable_risk: f64,
    coverage: f64,
    reference_class: &str,
) -> Result<ForecastAdjustment> {
    if !(base_estimate > 0.0) || !base_estimate.is_finite() {
        return Err(Error::domain(format!(
            "base estimate {base_estimate} must be positive"
        )));
    }
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(Error::domain(format!("coverage {coverage} outside (0, 1]")));
    }
    let uplift = required_uplift(dist, acceptable_risk)?;
    let median_uplift = dist.quantile(0.5)?;
    let tail = (1.0 - coverage) / 2.0;
    let apply = |pct: f64| base_estimate * (1.0 + pct / 100.0);
    Ok(ForecastAdjustment {
        reference_class: reference_class.to_string(),
        n: dist.len(),
        base_estimate,
        acceptable_risk,
        uplift,
        adjusted_estimate: apply(uplift),
        median_uplift,
        most_likely_estimate: apply(median_uplift),
        coverage,
        interval: (
            apply(dist.quantile(tail)?),
            apply(dist.quantile(1.0 - tail)?),
        ),
    })
}
