//! Synthetic fixture datasets.
//!
//! Only aggregate statistics of the historical samples are public, so the
//! bundled fixtures are synthetic: seeded skewed draws, rescaled so that each
//! group reproduces the published count, mean and standard deviation exactly
//! (up to floating-point rounding), and re-drawn until side constraints such
//! as band shares hold. They are calibration data, not historical records.
//!
//! `cargo run -p rcf-core --example gen_fixtures` rewrites `fixtures/`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal};

use crate::dataset::{ProjectRecord, ProjectType, Region};
use crate::refclass::ReferenceClass;

pub const FIXTURE_SEED: u64 = 2009;
pub const FIXTURE_DIR_ENV: &str = "RCF_FIXTURE_DIR";

/// `fixtures/` at the workspace root, unless overridden by `RCF_FIXTURE_DIR`.
pub fn fixture_dir() -> std::path::PathBuf {
    std::env::var_os(FIXTURE_DIR_ENV)
        .map(Into::into)
        .unwrap_or_else(|| std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"))
}

/// Target aggregates for one calibrated group.
#[derive(Debug, Clone, Copy)]
pub struct Target {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

pub const RAIL_COST: Target = Target {
    n: 58,
    mean: 44.7,
    sd: 38.4,
};
pub const BRIDGE_TUNNEL_COST: Target = Target {
    n: 33,
    mean: 33.8,
    sd: 62.4,
};
pub const ROAD_COST: Target = Target {
    n: 167,
    mean: 20.4,
    sd: 29.9,
};
pub const RAIL_TRAFFIC: Target = Target {
    n: 25,
    mean: -51.4,
    sd: 28.1,
};
pub const ROAD_TRAFFIC: Target = Target {
    n: 183,
    mean: 9.5,
    sd: 44.3,
};

/// Rail cost overrun by region: (region, count, mean). Emerging economies,
/// North America and Europe carry the published regional means; the `other`
/// group absorbs the remainder so the 58 projects still average 44.7.
pub const RAIL_REGIONS: [(Region, usize, f64); 4] = [
    (Region::Emerging, 12, 64.6),
    (Region::NorthAmerica, 10, 40.8),
    (Region::Europe, 30, 34.2),
    (Region::Other, 6, 63.9),
];

/// Urban rail projects observed for both cost and traffic. The standard
/// deviations are not published; 30 and 25 are assumptions.
pub const PAIRED_COST: Target = Target {
    n: 12,
    mean: 40.3,
    sd: 30.0,
};
pub const PAIRED_TRAFFIC: Target = Target {
    n: 12,
    mean: -47.8,
    sd: 25.0,
};

/// Anchors for the rail uplift curve: 40% at 50% risk, 68% at 10% risk.
pub const RISK_CURVE_ANCHORS: [(f64, f64); 2] = [(0.5, 40.0), (0.1, 68.0)];
/// Anchors for the tram estimate: 25% at 20% risk, 11.5625% at 50% risk
/// (400/320 - 1 and 357/320 - 1).
pub const TRAM_ANCHORS: [(f64, f64); 2] = [(0.2, 25.0), (0.5, 11.5625)];

const ANCHOR_CLASS_SIZE: usize = 41;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Right-skewed base distribution of a calibrated sample.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Gamma(f64),
    LogNormal(f64),
}

impl Shape {
    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Shape::Gamma(k) => Gamma::new(k, 1.0).expect("positive shape").sample(rng),
            Shape::LogNormal(s) => LogNormal::new(0.0, s).expect("positive sigma").sample(rng),
        }
    }
}

/// `n` values with sample mean `mean` and sample SD (n - 1) `sd`, shaped by
/// standardized draws from `shape`, redrawn until `accept` holds.
pub fn calibrated_sample<F>(target: Target, shape: Shape, seed: u64, accept: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> bool,
{
    for attempt in 0..100_000u64 {
        let mut r = rng(seed, attempt);
        let draws: Vec<f64> = (0..target.n).map(|_| shape.sample(&mut r)).collect();
        let m = draws.iter().sum::<f64>() / target.n as f64;
        let s =
            (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (target.n as f64 - 1.0)).sqrt();
        let values: Vec<f64> = draws
            .iter()
            .map(|d| target.mean + target.sd * (d - m) / s)
            .collect();
        if accept(&values) {
            return values;
        }
    }
    panic!("no calibrated sample satisfied the constraints for {target:?}");
}

fn count(values: &[f64], pred: impl Fn(f64) -> bool) -> usize {
    values.iter().filter(|v| pred(**v)).count()
}

/// Rounds to `decimals` places; negative values round to tens, hundreds, ...
fn round_to(x: f64, decimals: i32) -> f64 {
    if decimals >= 0 {
        let p = 10f64.powi(decimals);
        (x * p).round() / p
    } else {
        let p = 10f64.powi(-decimals);
        (x / p).round() * p
    }
}

struct RecordMaker {
    rng: ChaCha8Rng,
}

impl RecordMaker {
    fn cost_record(
        &mut self,
        id: String,
        t: ProjectType,
        region: Region,
        overrun: f64,
        years: (i32, i32),
    ) -> ProjectRecord {
        let estimated_cost = round_to(self.rng.random_range(20.0..5000.0), 1);
        let decision_year = self.rng.random_range(years.0..=years.1);
        ProjectRecord {
            name: format!("Synthetic {} project {}", t, id),
            id,
            project_type: t,
            region,
            decision_year,
            completion_year: Some(decision_year + self.rng.random_range(3..=12)),
            estimated_cost,
            actual_cost: Some(estimated_cost * (1.0 + overrun / 100.0)),
            estimated_traffic: None,
            actual_traffic: None,
        }
    }

    fn traffic_record(
        &mut self,
        id: String,
        t: ProjectType,
        inaccuracy: f64,
        years: (i32, i32),
    ) -> ProjectRecord {
        let estimated_cost = round_to(self.rng.random_range(20.0..5000.0), 1);
        let decision_year = self.rng.random_range(years.0..=years.1);
        let estimated_traffic = match t {
            ProjectType::Rail => round_to(self.rng.random_range(1.0e6..5.0e7), -3),
            _ => round_to(self.rng.random_range(2.0e6..3.0e7), -3),
        };
        let region = Region::ALL[self.rng.random_range(0..Region::ALL.len())];
        ProjectRecord {
            name: format!("Synthetic {} project {}", t, id),
            id,
            project_type: t,
            region,
            decision_year,
            completion_year: Some(decision_year + self.rng.random_range(3..=10)),
            estimated_cost,
            actual_cost: None,
            estimated_traffic: Some(estimated_traffic),
            actual_traffic: Some(estimated_traffic * (1.0 + inaccuracy / 100.0)),
        }
    }
}

const COST_YEARS: (i32, i32) = (1927, 1996);
const TRAFFIC_YEARS: (i32, i32) = (1969, 1998);

/// 258 cost records: rail 58 (regionally split), bridges and tunnels 33,
/// roads 167.
pub fn cost_dataset() -> Vec<ProjectRecord> {
    let mut maker = RecordMaker {
        rng: rng(FIXTURE_SEED, 1_000),
    };
    // roughly nine in ten projects overrun; small groups are left alone
    let accept = |v: &[f64]| {
        let share = count(v, |x| x > 0.0) as f64 / v.len() as f64;
        v.iter().all(|x| *x > -80.0) && (v.len() < 25 || (0.85..=0.95).contains(&share))
    };
    let mut out = Vec::new();

    // Common within-region SD keeps the pooled rail SD at exactly 38.4.
    let between: f64 = RAIL_REGIONS
        .iter()
        .map(|(_, n, m)| *n as f64 * (m - RAIL_COST.mean).powi(2))
        .sum();
    let total_ss = (RAIL_COST.n as f64 - 1.0) * RAIL_COST.sd.powi(2);
    let within_df: f64 = RAIL_REGIONS.iter().map(|(_, n, _)| *n as f64 - 1.0).sum();
    let within_sd = ((total_ss - between) / within_df).sqrt();
    let mut idx = 0;
    for (k, (region, n, mean)) in RAIL_REGIONS.iter().enumerate() {
        let target = Target {
            n: *n,
            mean: *mean,
            sd: within_sd,
        };
        for v in calibrated_sample(
            target,
            Shape::LogNormal(0.6),
            FIXTURE_SEED + 10 + k as u64,
            accept,
        ) {
            idx += 1;
            out.push(maker.cost_record(
                format!("RC{idx:03}"),
                ProjectType::Rail,
                *region,
                v,
                COST_YEARS,
            ));
        }
    }

    for (prefix, t, target, shape, seed) in [
        (
            "BC",
            ProjectType::BridgeTunnel,
            BRIDGE_TUNNEL_COST,
            Shape::LogNormal(0.6),
            FIXTURE_SEED + 20,
        ),
        (
            "DC",
            ProjectType::Road,
            ROAD_COST,
            Shape::LogNormal(0.6),
            FIXTURE_SEED + 30,
        ),
    ] {
        for (i, v) in calibrated_sample(target, shape, seed, accept)
            .into_iter()
            .enumerate()
        {
            let region = Region::ALL[maker.rng.random_range(0..Region::ALL.len())];
            out.push(maker.cost_record(format!("{prefix}{:03}", i + 1), t, region, v, COST_YEARS));
        }
    }
    out
}

/// 208 traffic records: rail 25, roads 183.
///
/// Rail: 21 of 25 (84%) outside +/-20% and at least 22 of 25 overestimated.
/// Roads: 91 or 92 of 183 (about half) outside +/-20% and a roughly even
/// split between over- and underestimates.
pub fn traffic_dataset() -> Vec<ProjectRecord> {
    let mut maker = RecordMaker {
        rng: rng(FIXTURE_SEED, 2_000),
    };
    let rail = calibrated_sample(RAIL_TRAFFIC, Shape::Gamma(1.5), FIXTURE_SEED + 40, |v| {
        v.iter().all(|x| *x > -95.0)
            && count(v, |x| x.abs() > 20.0) == 21
            && count(v, |x| x < 0.0) >= 22
    });
    let road = calibrated_sample(ROAD_TRAFFIC, Shape::Gamma(3.0), FIXTURE_SEED + 50, |v| {
        let outside = count(v, |x| x.abs() > 20.0);
        let under = count(v, |x| x < 0.0) as f64 / v.len() as f64;
        v.iter().all(|x| *x > -95.0)
            && (91..=92).contains(&outside)
            && (0.45..=0.55).contains(&under)
    });
    let mut out = Vec::new();
    for (i, v) in rail.into_iter().enumerate() {
        out.push(maker.traffic_record(
            format!("RT{:03}", i + 1),
            ProjectType::Rail,
            v,
            TRAFFIC_YEARS,
        ));
    }
    for (i, v) in road.into_iter().enumerate() {
        out.push(maker.traffic_record(
            format!("DT{:03}", i + 1),
            ProjectType::Road,
            v,
            TRAFFIC_YEARS,
        ));
    }
    out
}

/// Twelve urban rail projects with both cost and traffic outturns.
pub fn paired_dataset() -> Vec<ProjectRecord> {
    let mut maker = RecordMaker {
        rng: rng(FIXTURE_SEED, 3_000),
    };
    let cost = calibrated_sample(PAIRED_COST, Shape::Gamma(3.0), FIXTURE_SEED + 60, |v| {
        v.iter().all(|x| *x > -50.0)
    });
    let traffic = calibrated_sample(PAIRED_TRAFFIC, Shape::Gamma(2.0), FIXTURE_SEED + 70, |v| {
        v.iter().all(|x| *x > -90.0)
    });
    cost.into_iter()
        .zip(traffic)
        .enumerate()
        .map(|(i, (c, t))| {
            let mut rec = maker.cost_record(
                format!("UR{:03}", i + 1),
                ProjectType::Rail,
                Region::Europe,
                c,
                COST_YEARS,
            );
            let est = round_to(maker.rng.random_range(1.0e7..8.0e7), -3);
            rec.estimated_traffic = Some(est);
            rec.actual_traffic = Some(est * (1.0 + t / 100.0));
            rec
        })
        .collect()
}

/// A 41-value class whose order statistics sit exactly on the anchors.
///
/// With 41 values, the quantile at level `1 - r` for r in {0.5, 0.2, 0.1}
/// falls exactly on order statistic 21, 33 or 37. Non-anchor values are a
/// monotone piecewise-linear image of sorted Gamma draws, rounded to 0.1.
fn anchored_class(anchors: &[(f64, f64)], min: f64, max: f64, seed: u64) -> Vec<f64> {
    let n = ANCHOR_CLASS_SIZE;
    let mut r = rng(seed, 0);
    let mut z: Vec<f64> = (0..n).map(|_| Shape::Gamma(3.0).sample(&mut r)).collect();
    z.sort_by(f64::total_cmp);

    let mut knots: Vec<(usize, f64)> = anchors
        .iter()
        .map(|(risk, value)| (((n - 1) as f64 * (1.0 - risk)).round() as usize, *value))
        .collect();
    knots.push((0, min));
    knots.push((n - 1, max));
    knots.sort_by_key(|k| k.0);

    let mut out = vec![0.0; n];
    for w in knots.windows(2) {
        let ((i0, v0), (i1, v1)) = (w[0], w[1]);
        for i in i0..=i1 {
            let t = (z[i] - z[i0]) / (z[i1] - z[i0]);
            out[i] = round_to(v0 + t * (v1 - v0), 1).clamp(v0, v1);
        }
    }
    for (i, v) in &knots {
        out[*i] = *v;
    }
    out
}

pub fn risk_curve_anchor_values() -> Vec<f64> {
    anchored_class(&RISK_CURVE_ANCHORS, -12.0, 140.0, FIXTURE_SEED + 80)
}

pub fn tram_anchor_values() -> Vec<f64> {
    anchored_class(&TRAM_ANCHORS, -15.0, 62.0, FIXTURE_SEED + 90)
}

fn class_csv(prefix: &str, values: &[f64]) -> String {
    let mut s = String::from("project_id,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{prefix}{:03},{v}", i + 1);
    }
    s
}

fn dataset_csv(records: &[ProjectRecord]) -> String {
    let mut buf = Vec::new();
    crate::dataset::write_dataset(records, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8 csv")
}

const APPRAISAL_CSV: &str =
    "forecast_cost,forecast_annual_benefit,horizon_years,discount_rate\n4000,300,50,0.035\n";

const MANIFEST: &str = "\
# Fixture manifest

All files here are synthetic and generated by
`cargo run -p rcf-core --example gen_fixtures` (seeded, deterministic).
They reproduce published aggregate statistics of transport-project samples;
they are not historical project data.

| file | rows | calibrated to |
|------|------|---------------|
| `cost_overrun.csv` | 258 | rail n=58 mean 44.7 SD 38.4; bridges/tunnels n=33 mean 33.8 SD 62.4; roads n=167 mean 20.4 SD 29.9. Rail regions: emerging n=12 mean 64.6, north_america n=10 mean 40.8, europe n=30 mean 34.2, other n=6 mean 63.9 (balances the rail mean). Decision years uniform on 1927-1996. |
| `traffic_inaccuracy.csv` | 208 | rail n=25 mean -51.4 SD 28.1, 21/25 (84%) outside +/-20%, at least 22/25 overestimated; roads n=183 mean 9.5 SD 44.3, 91-92 of 183 outside +/-20%, 45-55% overestimated. Decision years uniform on 1969-1998. |
| `paired_urban_rail.csv` | 12 | mean cost overrun 40.3, mean traffic inaccuracy -47.8. SDs (30 and 25) are assumptions. |
| `risk_curve_anchor_class.csv` | 41 | uplift 40% at 50% risk and 68% at 10% risk (order statistics 21 and 37). |
| `tram_anchor_class.csv` | 41 | uplift 25% at 20% risk (400/320) and 11.5625% at 50% risk (357/320). |
| `appraisal_example.csv` | 1 | illustrative appraisal, not calibrated. |

Means and SDs match the targets up to floating-point rounding. Values are
affine-rescaled log-normal (costs) or Gamma (traffic) draws, with each cost
group of 25 or more holding 85-95% overruns. Distribution shapes are
otherwise arbitrary.
";

/// Every fixture file as `(file name, contents)`.
pub fn all_fixtures() -> Vec<(&'static str, String)> {
    vec![
        ("cost_overrun.csv", dataset_csv(&cost_dataset())),
        ("traffic_inaccuracy.csv", dataset_csv(&traffic_dataset())),
        ("paired_urban_rail.csv", dataset_csv(&paired_dataset())),
        (
            "risk_curve_anchor_class.csv",
            class_csv("RC-", &risk_curve_anchor_values()),
        ),
        (
            "tram_anchor_class.csv",
            class_csv("TR-", &tram_anchor_values()),
        ),
        ("appraisal_example.csv", APPRAISAL_CSV.to_string()),
        ("MANIFEST.md", MANIFEST.to_string()),
    ]
}

/// Records of the paired dataset as matched `(cost overrun, traffic
/// inaccuracy)` outcomes.
pub fn paired_outcomes(records: &[ProjectRecord]) -> Vec<crate::viability::PairedOutcome> {
    records
        .iter()
        .filter_map(|r| {
            Some(crate::viability::PairedOutcome {
                cost_overrun: crate::dataset::cost_overrun(r).ok()?,
                traffic_inaccuracy: crate::dataset::traffic_inaccuracy(r).ok()?,
            })
        })
        .collect()
}

/// Builds a class straight from a value list, for tests and examples.
pub fn class_from_values(
    values: &[f64],
    kind: crate::dataset::InaccuracyKind,
    provenance: &str,
) -> ReferenceClass {
    ReferenceClass {
        filter: crate::refclass::ClassFilter::default().with_min_size(2),
        kind,
        observations: values
            .iter()
            .enumerate()
            .map(|(i, v)| crate::dataset::InaccuracyObservation {
                project_id: format!("v{i}"),
                kind,
                value: *v,
            })
            .collect(),
        provenance: provenance.to_string(),
    }
}
