use proptest::prelude::*;

use rcf_core::dataset::{InaccuracyKind, ProjectType};
use rcf_core::fixtures;
use rcf_core::refclass::{build_reference_class, ClassFilter, EmpiricalDistribution};
use rcf_core::viability::{
    ex_post_evaluate, monte_carlo_viability, npv, AppraisalInput, Marginal, RealizationModel,
    ViabilityReport,
};

fn cost_dist() -> EmpiricalDistribution {
    EmpiricalDistribution::new(fixtures::risk_curve_anchor_values()).unwrap()
}

fn traffic_dist() -> EmpiricalDistribution {
    build_reference_class(
        &fixtures::traffic_dataset(),
        &ClassFilter::types([ProjectType::Rail]),
        InaccuracyKind::TrafficInaccuracy,
        "t",
    )
    .unwrap()
    .distribution()
    .unwrap()
}

fn independent(traffic: EmpiricalDistribution) -> RealizationModel {
    RealizationModel::Independent {
        cost_overrun: Marginal::Empirical(cost_dist()),
        traffic_inaccuracy: Marginal::Empirical(traffic),
    }
}

fn same_outcome(a: &ViabilityReport, b: &ViabilityReport) -> bool {
    a.forecast_bcr == b.forecast_bcr
        && a.forecast_npv == b.forecast_npv
        && a.mean_cost_overrun == b.mean_cost_overrun
        && a.mean_benefit_factor == b.mean_benefit_factor
        && a.mean_bcr == b.mean_bcr
        && a.bcr_quantiles == b.bcr_quantiles
        && a.npv_quantiles == b.npv_quantiles
        && a.irr_estimate == b.irr_estimate
        && a.p_nonviable == b.p_nonviable
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_model_matches_ex_post(
        cost in 10.0..1e5f64, bcr in 0.2..5.0f64, horizon in 1u32..60, rate in 0.0..0.12f64,
        overrun in -50.0..300.0f64, factor in 0.05..2.0f64,
    ) {
        let a = AppraisalInput::with_bcr(cost, bcr, horizon, rate);
        let single = ex_post_evaluate(&a, overrun, factor).unwrap();
        let mc = monte_carlo_viability(&a, &RealizationModel::constant(overrun, factor), 100, 3).unwrap();
        prop_assert!(same_outcome(&single, &mc), "{single:?}\n{mc:?}");
    }

    #[test]
    fn npv_at_zero_rate_is_sum(flows in prop::collection::vec(-1e4..1e4f64, 2..40)) {
        let direct = flows.iter().fold(0.0, |s, f| s + f);
        prop_assert_eq!(npv(0.0, &flows), direct);
    }

    #[test]
    fn better_benefits_never_hurt(shift in 0.0..80.0f64, seed in 0u64..1000) {
        let a = AppraisalInput::with_bcr(4000.0, 1.8, 40, 0.035);
        let base = monte_carlo_viability(&a, &independent(traffic_dist()), 500, seed).unwrap();
        let better = monte_carlo_viability(&a, &independent(traffic_dist().shifted(shift)), 500, seed).unwrap();
        prop_assert!(better.p_nonviable <= base.p_nonviable);
    }
}

#[test]
fn report_is_deterministic() {
    let a = AppraisalInput::with_bcr(4000.0, 1.5, 40, 0.035);
    let model = independent(traffic_dist());
    let once = monte_carlo_viability(&a, &model, 5000, 11).unwrap();
    let twice = monte_carlo_viability(&a, &model, 5000, 11).unwrap();
    assert_eq!(format!("{once:?}"), format!("{twice:?}"));
    for threads in [1, 2, 4] {
        let pooled = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_viability(&a, &model, 5000, 11).unwrap());
        assert_eq!(format!("{once:?}"), format!("{pooled:?}"));
    }
    let other = monte_carlo_viability(&a, &model, 5000, 12).unwrap();
    assert_ne!(once.mean_bcr, other.mean_bcr);
}

#[test]
fn report_shape() {
    let a = AppraisalInput::with_bcr(4000.0, 1.5, 40, 0.035);
    let r = monte_carlo_viability(&a, &independent(traffic_dist()), 2000, 5).unwrap();
    assert!((0.0..=1.0).contains(&r.p_nonviable));
    assert!(r.bcr_quantiles.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(r.npv_quantiles.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(monte_carlo_viability(&a, &independent(traffic_dist()), 99, 5).is_err());
    assert!(monte_carlo_viability(&a, &RealizationModel::Paired(Vec::new()), 100, 5).is_err());
}

fn p_nonviable_se(samples: usize) -> f64 {
    let a = AppraisalInput::with_bcr(4000.0, 1.6, 40, 0.035);
    let model = independent(traffic_dist());
    let p: Vec<f64> = (0..30u64)
        .map(|s| {
            monte_carlo_viability(&a, &model, samples, 1000 + s)
                .unwrap()
                .p_nonviable
        })
        .collect();
    let m = p.iter().sum::<f64>() / p.len() as f64;
    (p.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (p.len() - 1) as f64).sqrt()
}

#[test]
fn standard_error_shrinks_with_samples() {
    let (se1, se2, se4) = (
        p_nonviable_se(1000),
        p_nonviable_se(2000),
        p_nonviable_se(4000),
    );
    // Doubling: nominal ratio 2 within a factor of 3.
    let r2 = se1 / se2;
    assert!((2.0 / 3.0..=6.0).contains(&r2), "doubling ratio {r2}");
    // Quadrupling: square-root scaling gives 2.
    let r4 = se1 / se4;
    assert!((1.3..=3.0).contains(&r4), "quadrupling ratio {r4}");
}

#[test]
fn paired_fixture_mean_overrun() {
    let pairs = fixtures::paired_outcomes(&fixtures::paired_dataset());
    assert_eq!(pairs.len(), 12);
    let a = AppraisalInput::with_bcr(1000.0, 1.5, 30, 0.035);
    let r = monte_carlo_viability(&a, &RealizationModel::Paired(pairs), 10_000, 4).unwrap();
    assert!(
        (r.mean_cost_overrun - 40.3).abs() <= 2.0,
        "{}",
        r.mean_cost_overrun
    );
    assert!(
        (r.mean_benefit_factor - 0.522).abs() <= 0.03,
        "{}",
        r.mean_benefit_factor
    );
}

#[test]
fn constant_realization_examples() {
    let a = AppraisalInput::with_bcr(1000.0, 1.2, 30, 0.035);
    let r = monte_carlo_viability(&a, &RealizationModel::constant(80.0, 0.5), 1000, 1).unwrap();
    assert!(r
        .bcr_quantiles
        .iter()
        .all(|(_, v)| (v - 1.0 / 3.0).abs() < 1e-12));
    assert_eq!(r.p_nonviable, 1.0);
    let r = monte_carlo_viability(&a, &RealizationModel::constant(0.0, 1.0), 1000, 1).unwrap();
    assert_eq!(r.p_nonviable, 0.0);
}
