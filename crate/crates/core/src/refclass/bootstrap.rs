use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::EmpiricalDistribution;

pub const MIN_REPLICATES: usize = 100;
pub const MIN_BOOTSTRAP_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BootstrapStatistic {
    Mean,
    Quantile(f64),
}

fn check(n: usize, level: f64, replicates: usize) -> Result<()> {
    if n < MIN_BOOTSTRAP_N {
        return Err(Error::TooFewToBootstrap(n));
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::domain(format!(
            "{replicates} bootstrap replicates, need at least {MIN_REPLICATES}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Percentile bootstrap interval for an arbitrary statistic of `values`.
///
/// Replicate `i` resamples with a generator seeded from `seed` on stream `i`,
/// so the replicate set depends only on `(seed, replicates)`: intervals at
/// different levels with the same seed are nested.
pub fn percentile_bootstrap<F>(
    values: &[f64],
    statistic: F,
    level: f64,
    replicates: usize,
    seed: u64,
) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    check(values.len(), level, replicates)?;
    let n = values.len();
    let mut resample = vec![0.0; n];
    let mut stats = Vec::with_capacity(replicates);
    for i in 0..replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        for slot in resample.iter_mut() {
            *slot = values[rng.random_range(0..n)];
        }
        stats.push(statistic(&resample));
    }
    let dist = EmpiricalDistribution::new(stats)?;
    let tail = (1.0 - level) / 2.0;
    Ok((dist.quantile(tail)?, dist.quantile(1.0 - tail)?))
}

/// Percentile bootstrap interval for the mean or a quantile of a class.
pub fn bootstrap_ci(
    dist: &EmpiricalDistribution,
    statistic: BootstrapStatistic,
    level: f64,
    replicates: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if let BootstrapStatistic::Quantile(q) = statistic {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("quantile level {q} outside [0, 1]")));
        }
    }
    let stat = move |sample: &[f64]| match statistic {
        BootstrapStatistic::Mean => sample.iter().sum::<f64>() / sample.len() as f64,
        BootstrapStatistic::Quantile(q) => EmpiricalDistribution::new(sample.to_vec())
            .and_then(|d| d.quantile(q))
            .expect("resample has the original size"),
    };
    percentile_bootstrap(dist.values(), stat, level, replicates, seed)
}
