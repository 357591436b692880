//! Ex-post evaluation and Monte Carlo due diligence of cost-benefit
//! appraisals.
//!
//! A realization turns a forecast into an outturn: cost grows by a cost
//! overrun, and annual benefits scale with the traffic outturn through the
//! multiplier `1 + traffic_inaccuracy / 100`. Only construction cost enters
//! the cash flows; financing cost overruns are outside the model.

pub mod irr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::refclass::EmpiricalDistribution;

pub use irr::{irr, npv, project_flows};

pub const MIN_SAMPLES: usize = 100;

/// Quantile levels reported for BCR and NPV.
pub const REPORT_LEVELS: [f64; 7] = [0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppraisalInput {
    pub forecast_cost: f64,
    pub forecast_annual_benefit: f64,
    pub horizon_years: u32,
    pub discount_rate: f64,
}

impl AppraisalInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.forecast_cost > 0.0) || !self.forecast_cost.is_finite() {
            return Err(Error::domain("forecast_cost must be positive"));
        }
        if !(self.forecast_annual_benefit > 0.0) || !self.forecast_annual_benefit.is_finite() {
            return Err(Error::domain("forecast_annual_benefit must be positive"));
        }
        if self.horizon_years < 1 {
            return Err(Error::domain("horizon_years must be at least 1"));
        }
        if !(self.discount_rate > -1.0) || !self.discount_rate.is_finite() {
            return Err(Error::domain("discount_rate must exceed -1"));
        }
        Ok(())
    }

    /// Present value of one unit of benefit per year over the horizon.
    pub fn annuity_factor(&self) -> f64 {
        let growth = 1.0 + self.discount_rate;
        let mut discount = 1.0;
        let mut total = 0.0;
        for _ in 0..self.horizon_years {
            discount *= growth;
            total += 1.0 / discount;
        }
        total
    }

    pub fn forecast_bcr(&self) -> f64 {
        self.forecast_annual_benefit * self.annuity_factor() / self.forecast_cost
    }

    /// Appraisal whose annual benefit yields `bcr` for the given cost,
    /// horizon and rate.
    pub fn with_bcr(forecast_cost: f64, bcr: f64, horizon_years: u32, discount_rate: f64) -> Self {
        let mut a = AppraisalInput {
            forecast_cost,
            forecast_annual_benefit: 1.0,
            horizon_years,
            discount_rate,
        };
        a.forecast_annual_benefit = bcr * forecast_cost / a.annuity_factor();
        a
    }
}

/// A marginal distribution of percent inaccuracies.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Constant(f64),
    Empirical(EmpiricalDistribution),
}

impl Marginal {
    fn min(&self) -> f64 {
        match self {
            Marginal::Constant(v) => *v,
            Marginal::Empirical(d) => d.min(),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Marginal::Constant(v) => *v,
            Marginal::Empirical(d) => d.values()[rng.random_range(0..d.len())],
        }
    }
}

/// One project observed for both cost and traffic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedOutcome {
    pub cost_overrun: f64,
    pub traffic_inaccuracy: f64,
}

/// How realized cost overruns and benefit shortfalls are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum RealizationModel {
    /// Independent draws from each marginal.
    Independent {
        cost_overrun: Marginal,
        traffic_inaccuracy: Marginal,
    },
    /// Uniform draws of whole observed pairs, keeping their dependence.
    Paired(Vec<PairedOutcome>),
    /// One fixed outcome; the multiplier is kept as given rather than
    /// round-tripped through a percent.
    Fixed {
        cost_overrun: f64,
        benefit_factor: f64,
    },
}

impl RealizationModel {
    /// Fixed overrun (percent) and benefit multiplier.
    pub fn constant(cost_overrun: f64, benefit_factor: f64) -> Self {
        RealizationModel::Fixed {
            cost_overrun,
            benefit_factor,
        }
    }

    fn validate(&self) -> Result<()> {
        let (cost_min, traffic_min) = match self {
            RealizationModel::Independent {
                cost_overrun,
                traffic_inaccuracy,
            } => (cost_overrun.min(), traffic_inaccuracy.min()),
            RealizationModel::Paired(pairs) => {
                if pairs.is_empty() {
                    return Err(Error::config("paired mode needs at least one matched pair"));
                }
                (
                    pairs
                        .iter()
                        .map(|p| p.cost_overrun)
                        .fold(f64::INFINITY, f64::min),
                    pairs
                        .iter()
                        .map(|p| p.traffic_inaccuracy)
                        .fold(f64::INFINITY, f64::min),
                )
            }
            RealizationModel::Fixed {
                cost_overrun,
                benefit_factor,
            } => (*cost_overrun, 100.0 * (benefit_factor - 1.0)),
        };
        if !(traffic_min > -100.0) {
            return Err(Error::domain(format!(
                "traffic inaccuracy {traffic_min}% gives a nonpositive benefit multiplier"
            )));
        }
        if !(cost_min > -100.0) {
            return Err(Error::domain(format!(
                "cost overrun {cost_min}% gives a nonpositive realized cost"
            )));
        }
        Ok(())
    }

    /// Draws `(cost_overrun %, benefit multiplier)`.
    fn draw<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let (overrun, traffic) = match self {
            RealizationModel::Fixed {
                cost_overrun,
                benefit_factor,
            } => return (*cost_overrun, *benefit_factor),
            RealizationModel::Independent {
                cost_overrun,
                traffic_inaccuracy,
            } => {
                let o = cost_overrun.draw(rng);
                (o, traffic_inaccuracy.draw(rng))
            }
            RealizationModel::Paired(pairs) => {
                let p = pairs[rng.random_range(0..pairs.len())];
                (p.cost_overrun, p.traffic_inaccuracy)
            }
        };
        (overrun, 1.0 + traffic / 100.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Realization {
    cost_overrun: f64,
    benefit_factor: f64,
    cost: f64,
    annual_benefit: f64,
    bcr: f64,
    npv: f64,
}

fn realize(
    appraisal: &AppraisalInput,
    annuity: f64,
    cost_overrun: f64,
    benefit_factor: f64,
) -> Realization {
    let cost = appraisal.forecast_cost * (1.0 + cost_overrun / 100.0);
    let annual_benefit = appraisal.forecast_annual_benefit * benefit_factor;
    let pv = annual_benefit * annuity;
    Realization {
        cost_overrun,
        benefit_factor,
        cost,
        annual_benefit,
        bcr: pv / cost,
        npv: pv - cost,
    }
}

/// Outcome distribution of an appraisal under realized inaccuracies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViabilityReport {
    pub samples: usize,
    pub seed: u64,
    pub forecast_bcr: f64,
    pub forecast_npv: f64,
    pub mean_cost_overrun: f64,
    pub mean_benefit_factor: f64,
    pub mean_bcr: f64,
    pub bcr_quantiles: Vec<(f64, f64)>,
    pub npv_quantiles: Vec<(f64, f64)>,
    /// IRR of the cash flows built from the median realized cost and median
    /// realized annual benefit; `None` when NPV has no root on the bracket.
    pub irr_estimate: Option<f64>,
    /// Share of samples with BCR < 1.
    pub p_nonviable: f64,
}

fn quantiles(values: &[f64]) -> Vec<(f64, f64)> {
    if values.len() == 1 {
        return REPORT_LEVELS.iter().map(|q| (*q, values[0])).collect();
    }
    let d = EmpiricalDistribution::new(values.to_vec()).expect("finite realized values");
    REPORT_LEVELS
        .iter()
        .map(|q| (*q, d.quantile(*q).expect("level in [0, 1]")))
        .collect()
}

fn median(values: &[f64]) -> f64 {
    if values.len() == 1 {
        return values[0];
    }
    EmpiricalDistribution::new(values.to_vec())
        .and_then(|d| d.quantile(0.5))
        .expect("finite realized values")
}

/// Mean about the first value, exact when every value is equal.
fn shifted_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let Some(x0) = values.clone().next() else {
        return f64::NAN;
    };
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), x| (s + (x - x0), n + 1));
    x0 + sum / n as f64
}

fn report(appraisal: &AppraisalInput, draws: &[Realization], seed: u64) -> Result<ViabilityReport> {
    let n = draws.len() as f64;
    let collect = |f: fn(&Realization) -> f64| draws.iter().map(f).collect::<Vec<f64>>();
    let bcr = collect(|r| r.bcr);
    let npv_values = collect(|r| r.npv);
    let median_flows = project_flows(
        median(&collect(|r| r.cost)),
        median(&collect(|r| r.annual_benefit)),
        appraisal.horizon_years,
    );
    let forecast_pv = appraisal.forecast_annual_benefit * appraisal.annuity_factor();
    Ok(ViabilityReport {
        samples: draws.len(),
        seed,
        forecast_bcr: appraisal.forecast_bcr(),
        forecast_npv: forecast_pv - appraisal.forecast_cost,
        mean_cost_overrun: shifted_mean(draws.iter().map(|r| r.cost_overrun)),
        mean_benefit_factor: shifted_mean(draws.iter().map(|r| r.benefit_factor)),
        mean_bcr: shifted_mean(bcr.iter().copied()),
        bcr_quantiles: quantiles(&bcr),
        npv_quantiles: quantiles(&npv_values),
        irr_estimate: irr(&median_flows)?,
        p_nonviable: bcr.iter().filter(|b| **b < 1.0).count() as f64 / n,
    })
}

/// Evaluates one realized outcome against the appraisal.
pub fn ex_post_evaluate(
    appraisal: &AppraisalInput,
    realized_cost_overrun: f64,
    realized_benefit_factor: f64,
) -> Result<ViabilityReport> {
    appraisal.validate()?;
    if !(realized_benefit_factor > 0.0) {
        return Err(Error::domain("realized benefit factor must be positive"));
    }
    if !(realized_cost_overrun > -100.0) {
        return Err(Error::domain("realized cost overrun must exceed -100%"));
    }
    let r = realize(
        appraisal,
        appraisal.annuity_factor(),
        realized_cost_overrun,
        realized_benefit_factor,
    );
    report(appraisal, &[r], 0)
}

/// Generator for sample `index`: stream `index` of the seed's ChaCha8
/// keystream, so results do not depend on how samples are scheduled.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Monte Carlo distribution of realized BCR and NPV.
///
/// Samples are drawn in parallel; the report is bit-identical for identical
/// `(appraisal, model, samples, seed)` whatever the thread count.
pub fn monte_carlo_viability(
    appraisal: &AppraisalInput,
    model: &RealizationModel,
    samples: usize,
    seed: u64,
) -> Result<ViabilityReport> {
    appraisal.validate()?;
    model.validate()?;
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "{samples} samples requested, need at least {MIN_SAMPLES}"
        )));
    }
    let annuity = appraisal.annuity_factor();
    let draws: Vec<Realization> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let (overrun, factor) = model.draw(&mut rng);
            realize(appraisal, annuity, overrun, factor)
        })
        .collect();
    report(appraisal, &draws, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn appraisal(bcr: f64) -> AppraisalInput {
        AppraisalInput::with_bcr(1000.0, bcr, 30, 0.04)
    }

    #[test]
    fn identity_realization() {
        let a = appraisal(1.3);
        let r = ex_post_evaluate(&a, 0.0, 1.0).unwrap();
        assert!((r.bcr_quantiles[3].1 - a.forecast_bcr()).abs() < 1e-12);
        assert_eq!(r.npv_quantiles[3].1, r.forecast_npv);
        assert_eq!(r.p_nonviable, 0.0);
    }

    #[test]
    fn one_period_closed_form() {
        let a = AppraisalInput {
            forecast_cost: 100.0,
            forecast_annual_benefit: 110.0,
            horizon_years: 1,
            discount_rate: 0.0,
        };
        let r = ex_post_evaluate(&a, 0.0, 1.0).unwrap();
        assert!((r.npv_quantiles[0].1 - 10.0).abs() < 1e-12);
        assert!((r.irr_estimate.unwrap() - 0.10).abs() < 1e-8);
    }

    #[test]
    fn overrun_and_halved_revenue_ratio() {
        let a = appraisal(2.0);
        let r = ex_post_evaluate(&a, 80.0, 0.5).unwrap();
        assert!((r.bcr_quantiles[3].1 - 2.0 * 0.5 / 1.8).abs() < 1e-12);
    }

    #[test]
    fn constant_models() {
        let mc = monte_carlo_viability(
            &appraisal(1.2),
            &RealizationModel::constant(80.0, 0.5),
            500,
            9,
        )
        .unwrap();
        assert!((mc.bcr_quantiles[0].1 - 1.2 * 0.5 / 1.8).abs() < 1e-12);
        assert_eq!(mc.p_nonviable, 1.0);
        let mc = monte_carlo_viability(
            &appraisal(1.2),
            &RealizationModel::constant(0.0, 1.0),
            500,
            9,
        )
        .unwrap();
        assert_eq!(mc.p_nonviable, 0.0);
    }

    #[test]
    fn input_errors() {
        let a = appraisal(1.2);
        assert!(monte_carlo_viability(&a, &RealizationModel::constant(0.0, 1.0), 99, 1).is_err());
        assert!(matches!(
            monte_carlo_viability(&a, &RealizationModel::Paired(vec![]), 100, 1),
            Err(Error::Config(_))
        ));
        assert!(monte_carlo_viability(&a, &RealizationModel::constant(0.0, 0.0), 100, 1).is_err());
        assert!(ex_post_evaluate(&a, 0.0, 0.0).is_err());
        let mut bad = a;
        bad.horizon_years = 0;
        assert!(bad.validate().is_err());
        bad = a;
        bad.discount_rate = -1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn no_irr_is_flag_not_error() {
        // benefits never recover the cost even at -99%: 1 year, tiny benefit
        let a = AppraisalInput {
            forecast_cost: 100.0,
            forecast_annual_benefit: 0.5,
            horizon_years: 1,
            discount_rate: 0.0,
        };
        assert_eq!(ex_post_evaluate(&a, 0.0, 1.0).unwrap().irr_estimate, None);
    }
}
