use proptest::prelude::*;

use rcf_core::dataset::ProjectType;
use rcf_core::unfittest::{
    build_rcf_correction, generate_pool, run_experiment, select, stated_appraisal, top_k,
    ExperimentConfig, PromoterProject, SelectionPolicy, SelectionRule,
};

fn policy(rule: SelectionRule, k: usize, config: &ExperimentConfig) -> SelectionPolicy {
    SelectionPolicy {
        rule,
        budget_slots: k,
        rcf: (rule == SelectionRule::RcfAdjustedBcr).then(|| build_rcf_correction(config).unwrap()),
    }
}

fn fast(mut c: ExperimentConfig) -> ExperimentConfig {
    c.bootstrap_replicates = 200;
    c
}

fn mean_of(r: &rcf_core::unfittest::ExperimentReport, rule: SelectionRule) -> f64 {
    r.policies
        .iter()
        .find(|p| p.policy == rule)
        .unwrap()
        .mean_realized_bcr_funded
}

proptest! {
    #[test]
    fn scaling_appraisals_keeps_funded_set(
        values in prop::collection::vec(0.01..10.0f64, 1..40), c in 1e-3..1e3f64, k in 1usize..10,
    ) {
        let ids: Vec<String> = (0..values.len()).map(|i| format!("p{i:02}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        let mut a = top_k(&values, &refs, k);
        let mut b = top_k(&scaled, &refs, k);
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn honest_pools_fund_the_same_projects(seed in any::<u64>(), trial in 0u64..1000, k in 1usize..8) {
        let mut config = ExperimentConfig::zero_bias();
        config.seed = seed;
        let pool = generate_pool(&config, trial);
        let naive = select(&pool, &policy(SelectionRule::NaiveStatedBcr, k, &config)).unwrap();
        let truth = select(&pool, &policy(SelectionRule::TrueBcr, k, &config)).unwrap();
        prop_assert_eq!(naive.funded, truth.funded);
    }
}

#[test]
fn hand_checked_pool() {
    let project = |id: &str, benefit: f64, bias: f64| PromoterProject {
        id: id.into(),
        project_type: ProjectType::Road,
        true_cost: 100.0,
        true_benefit: benefit,
        cost_understatement: 0.0,
        benefit_bias: bias,
        private_capital_share: None,
    };
    let pool = [project("a", 100.0, 60.0), project("b", 150.0, 0.0)];
    assert!((stated_appraisal(&pool[0]) - 1.6).abs() < 1e-12);
    let config = ExperimentConfig::default();
    let naive = select(&pool, &policy(SelectionRule::NaiveStatedBcr, 1, &config)).unwrap();
    let truth = select(&pool, &policy(SelectionRule::TrueBcr, 1, &config)).unwrap();
    assert_eq!(naive.funded, ["a"]);
    assert_eq!(truth.funded, ["b"]);
    assert!((naive.regret - 0.5).abs() < 1e-12);
}

#[test]
fn single_project_pools_agree() {
    let mut config = fast(ExperimentConfig::default());
    config.pool_size = 1;
    config.budget_slots = 1;
    config.trials = 200;
    let r = run_experiment(&config).unwrap();
    let per_trial = &r.per_trial;
    assert!(per_trial[0] == per_trial[1] && per_trial[1] == per_trial[2]);
    assert!(r.policies.iter().all(|p| p.mean_regret == 0.0));
}

#[test]
fn zero_bias_policies_identical() {
    let r = run_experiment(&fast(ExperimentConfig::zero_bias())).unwrap();
    let gap = r.naive_vs_rcf.unwrap();
    assert!(!gap.significant);
    assert!(gap.ci_lo <= 0.0 && 0.0 <= gap.ci_hi);
    assert_eq!(r.per_trial[0], r.per_trial[2]);
}

#[test]
fn experiment_is_deterministic() {
    let config = fast(ExperimentConfig {
        trials: 300,
        ..ExperimentConfig::default()
    });
    let a = run_experiment(&config).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_experiment(&config).unwrap());
    assert_eq!(a, b);
}

#[test]
fn ordering_holds_across_replicated_experiments() {
    let seeds = 20u64;
    let held = (0..seeds)
        .filter(|s| {
            let config = fast(ExperimentConfig {
                seed: 7_000 + s,
                ..ExperimentConfig::default()
            });
            let r = run_experiment(&config).unwrap();
            let (naive, rcf, truth) = (
                mean_of(&r, SelectionRule::NaiveStatedBcr),
                mean_of(&r, SelectionRule::RcfAdjustedBcr),
                mean_of(&r, SelectionRule::TrueBcr),
            );
            truth >= rcf && rcf >= naive
        })
        .count();
    assert!(
        held as f64 >= 0.95 * seeds as f64,
        "ordering held in {held} of {seeds} experiments"
    );
}

#[test]
fn bias_raises_funding_odds_under_naive_selection() {
    let config = ExperimentConfig::default();
    let naive = policy(SelectionRule::NaiveStatedBcr, config.budget_slots, &config);
    let (mut bias, mut funded) = (Vec::new(), Vec::new());
    for trial in 0..1000 {
        let pool = generate_pool(&config, trial);
        let chosen = select(&pool, &naive).unwrap().funded;
        for p in &pool {
            bias.push((stated_appraisal(p) / p.true_bcr()).ln());
            funded.push(if chosen.contains(&p.id) { 1.0 } else { 0.0 });
        }
    }
    let n = bias.len() as f64;
    let (mb, mf) = (bias.iter().sum::<f64>() / n, funded.iter().sum::<f64>() / n);
    let cov = bias
        .iter()
        .zip(&funded)
        .map(|(b, f)| (b - mb) * (f - mf))
        .sum::<f64>()
        / (n - 1.0);
    assert!(cov > 0.0, "covariance {cov}");
}
