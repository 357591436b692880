//! t-tests used to decide whether forecast errors are biased, differ between
//! groups, or drift over time.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::student_t_two_sided;

use super::summary::{mean, sample_variance};

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    pub reject_at_5pct: bool,
    /// Effect estimate: the sample mean, the mean difference, or the OLS
    /// slope in percent per year, depending on the test.
    pub estimate: f64,
}

impl TestResult {
    fn new(name: &str, statistic: f64, df: f64, estimate: f64) -> Self {
        let p_value = if statistic == 0.0 {
            1.0
        } else {
            student_t_two_sided(statistic, df)
        };
        TestResult {
            test_name: name.to_string(),
            statistic,
            df,
            p_value,
            reject_at_5pct: p_value < ALPHA,
            estimate,
        }
    }
}

/// Statistic for a zero-spread sample: infinite unless the effect is zero.
fn ratio(effect: f64, se: f64) -> f64 {
    if se > 0.0 {
        effect / se
    } else if effect == 0.0 {
        0.0
    } else {
        effect.signum() * f64::INFINITY
    }
}

/// One-sample two-sided t-test of `mean == 0`.
pub fn test_mean_nonzero(values: &[f64]) -> Result<TestResult> {
    let n = values.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "{n} observation(s), need at least 2"
        )));
    }
    let var = sample_variance(values);
    if var == 0.0 {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    let m = mean(values);
    let t = m / (var / n as f64).sqrt();
    Ok(TestResult::new("mean_nonzero", t, n as f64 - 1.0, m))
}

/// Welch's unequal-variance two-sample t-test, two-sided.
pub fn test_group_difference(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "group sizes {} and {}, need at least 2 each",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let va = sample_variance(a) / na;
    let vb = sample_variance(b) / nb;
    if va + vb == 0.0 {
        return Err(Error::DegenerateSample(
            "both groups have zero variance".into(),
        ));
    }
    let diff = mean(a) - mean(b);
    let t = diff / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TestResult::new("welch_group_difference", t, df, diff))
}

/// OLS regression of inaccuracy on decision year with a t-test on the slope.
///
/// Needs at least three observations spread over at least two distinct
/// years. An exact linear fit with nonzero slope yields an infinite
/// statistic and p = 0.
pub fn test_time_trend(points: &[(i32, f64)]) -> Result<TestResult> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateSample(format!(
            "{n} observation(s), need at least 3"
        )));
    }
    let nf = n as f64;
    let xbar = points.iter().map(|p| p.0 as f64).sum::<f64>() / nf;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NoTimeVariation);
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 as f64 - xbar) * (p.1 - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0 as f64).powi(2))
        .sum();
    let df = nf - 2.0;
    // residuals at rounding level count as an exact fit
    let scale = points.iter().map(|p| p.1 * p.1).sum::<f64>().max(1.0);
    let sse = if sse <= 1e-24 * scale { 0.0 } else { sse };
    let se = (sse / df / sxx).sqrt();
    Ok(TestResult::new(
        "time_trend_slope",
        ratio(slope, se),
        df,
        slope,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_sample() {
        let r = test_mean_nonzero(&[-5.0, 5.0, -5.0, 5.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject_at_5pct);
    }

    #[test]
    fn degenerate_samples() {
        assert!(matches!(
            test_mean_nonzero(&[3.0]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            test_mean_nonzero(&[3.0, 3.0, 3.0]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(test_group_difference(&[1.0], &[1.0, 2.0]).is_err());
        assert!(test_group_difference(&[1.0, 1.0], &[2.0, 2.0]).is_err());
    }

    #[test]
    fn identical_groups() {
        let g = [3.0, 9.0, 4.0, 12.0];
        let r = test_group_difference(&g, &g).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject_at_5pct);
    }

    #[test]
    fn welch_hand_computed() {
        // a = {1,2,3,4}: mean 2.5, var 5/3; b = {2,4,6}: mean 4, var 4
        // se^2 = 5/12 + 4/3 = 21/12; t = -1.5 / sqrt(1.75)
        // df = (21/12)^2 / ((5/12)^2/3 + (4/3)^2/2) = 3.0625 / (0.0578704 + 0.8888889)
        let r = test_group_difference(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((r.statistic - (-1.5 / 1.75f64.sqrt())).abs() < 1e-12);
        let df = 3.0625 / (25.0 / 144.0 / 3.0 + 16.0 / 9.0 / 2.0);
        assert!((r.df - df).abs() < 1e-12);
        assert_eq!(r.estimate, -1.5);
    }

    #[test]
    fn exact_trend() {
        let pts: Vec<(i32, f64)> = (1990..2010).map(|y| (y, (y - 2000) as f64)).collect();
        let r = test_time_trend(&pts).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-12);
        assert!(r.reject_at_5pct);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn two_year_slope_is_mean_gap() {
        let pts = [
            (1980, 10.0),
            (1980, 30.0),
            (1980, 20.0),
            (1990, 55.0),
            (1990, 45.0),
            (1990, 50.0),
        ];
        let r = test_time_trend(&pts).unwrap();
        assert!((r.estimate - (50.0 - 20.0) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn one_year_has_no_trend() {
        assert!(matches!(
            test_time_trend(&[(2000, 1.0), (2000, 2.0), (2000, 5.0)]),
            Err(Error::NoTimeVariation)
        ));
    }
}
