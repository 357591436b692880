use proptest::prelude::*;

use rcf_core::dataset::{InaccuracyKind, ProjectType, Region};
use rcf_core::fixtures;
use rcf_core::forecast::{reference_class_forecast, required_uplift, uplift_schedule};
use rcf_core::refclass::{
    bootstrap_ci, build_reference_class, BootstrapStatistic, ClassFilter, EmpiricalDistribution,
};
use rcf_core::Error;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![-80.0..300.0f64, (-4..10i32).prop_map(|k| k as f64 * 10.0)],
        2..80,
    )
}

fn risks() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001..=1.0f64, 1..30)
}

proptest! {
    #[test]
    fn quantile_monotone_with_exact_ends(v in values(), mut qs in prop::collection::vec(0.0..=1.0f64, 2..40)) {
        let d = EmpiricalDistribution::new(v).unwrap();
        qs.sort_by(f64::total_cmp);
        let out: Vec<f64> = qs.iter().map(|q| d.quantile(*q).unwrap()).collect();
        prop_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(d.quantile(0.0).unwrap(), d.min());
        prop_assert_eq!(d.quantile(1.0).unwrap(), d.max());
    }

    #[test]
    fn quantile_shifts_with_data(v in values(), c in -500.0..500.0f64, q in 0.0..=1.0f64) {
        let d = EmpiricalDistribution::new(v).unwrap();
        let s = d.shifted(c);
        let (a, b) = (d.quantile(q).unwrap(), s.quantile(q).unwrap());
        prop_assert!((b - (a + c)).abs() <= 1e-9 * (a.abs() + c.abs()).max(1.0));
    }

    #[test]
    fn quantile_undoes_ecdf(v in values()) {
        let d = EmpiricalDistribution::new(v).unwrap();
        for x in d.values() {
            prop_assert!(d.quantile(d.ecdf(*x)).unwrap() >= *x - 1e-9);
        }
    }

    #[test]
    fn uplift_monotone_and_covering(v in values(), mut grid in risks()) {
        let d = EmpiricalDistribution::new(v).unwrap();
        grid.sort_by(|a, b| b.total_cmp(a));
        let schedule = uplift_schedule(&d, &grid, "p").unwrap();
        prop_assert!(schedule.points.windows(2).all(|w| w[0].uplift <= w[1].uplift));
        for p in &schedule.points {
            let over = d.values().iter().filter(|v| **v > p.uplift).count() as f64 / d.len() as f64;
            prop_assert!(over <= p.acceptable_risk, "risk {} uplift {} exceeded by {}", p.acceptable_risk, p.uplift, over);
        }
    }

    #[test]
    fn forecast_linear_in_base(v in values(), base in 1.0..1e5f64, c in 0.01..100.0f64, r in 0.01..=1.0f64, cov in 0.05..0.99f64) {
        let d = EmpiricalDistribution::new(v).unwrap();
        let a = reference_class_forecast(base, &d, r, cov, "x").unwrap();
        let b = reference_class_forecast(base * c, &d, r, cov, "x").unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(1.0);
        prop_assert!(close(a.adjusted_estimate * c, b.adjusted_estimate));
        prop_assert!(close(a.interval.0 * c, b.interval.0));
        prop_assert!(close(a.interval.1 * c, b.interval.1));
    }

    #[test]
    fn forecast_agrees_with_schedule(v in values(), base in 1.0..1e5f64, r in 0.01..=1.0f64) {
        let d = EmpiricalDistribution::new(v).unwrap();
        let f = reference_class_forecast(base, &d, r, 0.8, "x").unwrap();
        let s = uplift_schedule(&d, &[r], "x").unwrap();
        prop_assert_eq!(f.adjusted_estimate, base * (1.0 + s.points[0].uplift / 100.0));
    }
}

#[test]
fn documented_quantile_and_ecdf_values() {
    let d = EmpiricalDistribution::new(vec![50.0, 10.0, 30.0, 20.0, 40.0]).unwrap();
    assert_eq!(d.quantile(0.5).unwrap(), 30.0);
    let d = EmpiricalDistribution::new(vec![0.0, 10.0, 20.0, 30.0]).unwrap();
    assert_eq!(d.quantile(0.75).unwrap(), 22.5);
    assert!(matches!(d.quantile(1.5), Err(Error::Domain(_))));
    let d = EmpiricalDistribution::new(vec![10.0, 20.0, 30.0]).unwrap();
    assert_eq!(d.ecdf(20.0), 2.0 / 3.0);
    assert_eq!(d.ecdf(5.0), 0.0);
    assert_eq!(d.ecdf(30.0), 1.0);
    assert_eq!(required_uplift(&d, 1.0).unwrap(), 10.0);
    assert!(matches!(required_uplift(&d, 0.0), Err(Error::ZeroRisk)));
    assert!(required_uplift(&d, 1.2).is_err());
}

#[test]
fn uplift_keeps_guarantee_where_interpolation_would_not() {
    // Interpolating at 0.7 gives 14, which 1 of 3 observations exceed.
    let d = EmpiricalDistribution::new(vec![0.0, 10.0, 20.0]).unwrap();
    assert!(d.quantile(0.7).unwrap() < 20.0);
    assert_eq!(required_uplift(&d, 0.3).unwrap(), 20.0);
}

#[test]
fn anchor_schedule_middle_point() {
    let d = EmpiricalDistribution::new(fixtures::risk_curve_anchor_values()).unwrap();
    let s = uplift_schedule(&d, &[0.5, 0.2, 0.1], "a").unwrap();
    let u: Vec<f64> = s.points.iter().map(|p| p.uplift).collect();
    assert_eq!((u[0], u[2]), (40.0, 68.0));
    assert!(40.0 <= u[1] && u[1] <= 68.0);
    let s = uplift_schedule(&d, &[1.0], "a").unwrap();
    assert_eq!(s.points[0].uplift, d.min());
    assert!(uplift_schedule(&d, &[], "a").is_err());
}

#[test]
fn degenerate_forecast() {
    let d = EmpiricalDistribution::new(vec![0.0, 0.0, 0.0]).unwrap();
    let f = reference_class_forecast(100.0, &d, 0.5, 0.8, "z").unwrap();
    assert_eq!(f.adjusted_estimate, 100.0);
    assert_eq!(f.interval, (100.0, 100.0));
    assert!(reference_class_forecast(0.0, &d, 0.5, 0.8, "z").is_err());
}

#[test]
fn classes_from_fixtures() {
    let records = fixtures::cost_dataset();
    let rail = build_reference_class(
        &records,
        &ClassFilter::types([ProjectType::Rail]),
        InaccuracyKind::CostOverrun,
        "f",
    )
    .unwrap();
    assert_eq!(rail.len(), 58);

    let emerging = ClassFilter::types([ProjectType::Rail])
        .with_regions([Region::Emerging])
        .with_min_size(5);
    let class =
        build_reference_class(&records, &emerging, InaccuracyKind::CostOverrun, "f").unwrap();
    let mean = class.values().iter().sum::<f64>() / class.len() as f64;
    assert_eq!(format!("{mean:.1}"), "64.6");

    let none = ClassFilter::types([ProjectType::Ict]);
    assert!(matches!(
        build_reference_class(&records, &none, InaccuracyKind::CostOverrun, "f"),
        Err(Error::ClassTooSmall { count: 0, .. })
    ));

    // Rebuilding from the class's own records gives the same class.
    let members: Vec<_> = records
        .iter()
        .filter(|r| rail.observations.iter().any(|o| o.project_id == r.id))
        .cloned()
        .collect();
    let again =
        build_reference_class(&members, &rail.filter, InaccuracyKind::CostOverrun, "f").unwrap();
    assert_eq!(again, rail);
}

#[test]
fn bootstrap_examples() {
    let flat = EmpiricalDistribution::new(vec![40.0; 5]).unwrap();
    assert_eq!(
        bootstrap_ci(&flat, BootstrapStatistic::Mean, 0.95, 500, 1).unwrap(),
        (40.0, 40.0)
    );

    let rail = build_reference_class(
        &fixtures::cost_dataset(),
        &ClassFilter::types([ProjectType::Rail]),
        InaccuracyKind::CostOverrun,
        "f",
    )
    .unwrap()
    .distribution()
    .unwrap();
    let (lo, hi) = bootstrap_ci(&rail, BootstrapStatistic::Mean, 0.95, 2000, 3).unwrap();
    assert!(lo < 44.7 && 44.7 < hi, "[{lo}, {hi}]");

    for stat in [BootstrapStatistic::Mean, BootstrapStatistic::Quantile(0.5)] {
        let narrow = bootstrap_ci(&rail, stat, 0.90, 1000, 8).unwrap();
        let wide = bootstrap_ci(&rail, stat, 0.99, 1000, 8).unwrap();
        assert!(wide.0 <= narrow.0 && narrow.1 <= wide.1);
    }

    let four = EmpiricalDistribution::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!(matches!(
        bootstrap_ci(&four, BootstrapStatistic::Mean, 0.95, 500, 1),
        Err(Error::TooFewToBootstrap(4))
    ));
    assert!(bootstrap_ci(&flat, BootstrapStatistic::Mean, 0.95, 99, 1).is_err());
}
