use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use super::record::{
    observations, InaccuracyKind, InaccuracyObservation, ProjectRecord, ProjectType, Region,
};

pub const DEFAULT_BAND_HALFWIDTH: f64 = 20.0;

/// Robust z-score cut-off for optional outlier exclusion.
pub const OUTLIER_Z: f64 = 3.0;

/// Normal-consistency constant turning the MAD into a standard deviation.
const MAD_SCALE: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct GroupKey {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub project_type: Option<ProjectType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.project_type, self.region) {
            (None, None) => f.write_str("all"),
            (Some(t), None) => write!(f, "{t}"),
            (None, Some(r)) => write!(f, "{r}"),
            (Some(t), Some(r)) => write!(f, "{t}/{r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    All,
    Type,
    Region,
    TypeRegion,
}

impl GroupBy {
    pub fn key(self, record: &ProjectRecord) -> GroupKey {
        let t = Some(record.project_type);
        let r = Some(record.region);
        match self {
            GroupBy::All => GroupKey::default(),
            GroupBy::Type => GroupKey {
                project_type: t,
                region: None,
            },
            GroupBy::Region => GroupKey {
                project_type: None,
                region: r,
            },
            GroupBy::TypeRegion => GroupKey {
                project_type: t,
                region: r,
            },
        }
    }
}

impl std::str::FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(GroupBy::All),
            "type" => Ok(GroupBy::Type),
            "region" => Ok(GroupBy::Region),
            "type,region" | "type_region" => Ok(GroupBy::TypeRegion),
            other => Err(format!(
                "unknown grouping `{other}` (expected all, type, region or type,region)"
            )),
        }
    }
}

/// Descriptive statistics for one group of inaccuracy observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub group: GroupKey,
    pub kind: InaccuracyKind,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator). Reported as 0 when
    /// `n == 1`, with `std_dev_defined` false.
    pub std_dev: f64,
    pub std_dev_defined: bool,
    pub share_with_overrun: f64,
    pub share_outside_band: f64,
    pub band_halfwidth: f64,
    /// Ids dropped by the robust outlier filter, if it was applied.
    pub excluded: Vec<String>,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n - 1 denominator (two-pass).
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Splits observations into (kept, excluded) by robust z-score
/// `|x - median| / (1.4826 * MAD) > 3`. Nothing is excluded when MAD is 0.
pub fn split_outliers(
    obs: &[InaccuracyObservation],
) -> (Vec<InaccuracyObservation>, Vec<InaccuracyObservation>) {
    if obs.len() < 3 {
        return (obs.to_vec(), Vec::new());
    }
    let values: Vec<f64> = obs.iter().map(|o| o.value).collect();
    let med = median(&values);
    let deviations: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&deviations) * MAD_SCALE;
    if mad == 0.0 {
        return (obs.to_vec(), Vec::new());
    }
    obs.iter()
        .cloned()
        .partition(|o| ((o.value - med) / mad).abs() <= OUTLIER_Z)
}

/// Summarizes one group; returns `None` (with a warning) for an empty group.
pub fn summarize_group(
    group: GroupKey,
    kind: InaccuracyKind,
    values: &[f64],
    band_halfwidth: f64,
) -> Option<DatasetSummary> {
    if values.is_empty() {
        log::warn!("group {group} has no {kind} observations; omitted");
        return None;
    }
    let n = values.len();
    let (std_dev, std_dev_defined) = if n > 1 {
        (sample_variance(values).sqrt(), true)
    } else {
        log::warn!(
            "group {group} has a single observation; standard deviation undefined, reported as 0"
        );
        (0.0, false)
    };
    let count = |pred: &dyn Fn(f64) -> bool| values.iter().filter(|v| pred(**v)).count() as f64;
    Some(DatasetSummary {
        group,
        kind,
        n,
        mean: mean(values),
        std_dev,
        std_dev_defined,
        share_with_overrun: count(&|v| v > 0.0) / n as f64,
        share_outside_band: count(&|v| v.abs() > band_halfwidth) / n as f64,
        band_halfwidth,
        excluded: Vec::new(),
    })
}

/// Groups observations by `key` and summarizes each group, ordered by key.
pub fn summarize<F>(
    observations: &[InaccuracyObservation],
    key: F,
    band_halfwidth: f64,
) -> Vec<DatasetSummary>
where
    F: Fn(&InaccuracyObservation) -> GroupKey,
{
    let mut groups: BTreeMap<GroupKey, Vec<&InaccuracyObservation>> = BTreeMap::new();
    for o in observations {
        groups.entry(key(o)).or_default().push(o);
    }
    groups
        .into_iter()
        .filter_map(|(k, obs)| {
            let kind = obs.first()?.kind;
            let values: Vec<f64> = obs.iter().map(|o| o.value).collect();
            summarize_group(k, kind, &values, band_halfwidth)
        })
        .collect()
}

/// Convenience wrapper: observations of `kind` from `records`, grouped by
/// record attributes, optionally with the robust outlier filter applied per
/// group.
pub fn summarize_records(
    records: &[ProjectRecord],
    kind: InaccuracyKind,
    group_by: GroupBy,
    band_halfwidth: f64,
    exclude_outliers: bool,
) -> Vec<DatasetSummary> {
    let by_id: HashMap<&str, &ProjectRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let obs = observations(records, kind);
    let key = |o: &InaccuracyObservation| group_by.key(by_id[o.project_id.as_str()]);
    if !exclude_outliers {
        return summarize(&obs, key, band_halfwidth);
    }

    let mut groups: BTreeMap<GroupKey, Vec<InaccuracyObservation>> = BTreeMap::new();
    for o in obs {
        groups.entry(key(&o)).or_default().push(o);
    }
    groups
        .into_iter()
        .filter_map(|(k, group)| {
            let (kept, dropped) = split_outliers(&group);
            let values: Vec<f64> = kept.iter().map(|o| o.value).collect();
            let mut s = summarize_group(k, kind, &values, band_halfwidth)?;
            s.excluded = dropped.into_iter().map(|o| o.project_id).collect();
            Some(s)
        })
        .collect()
}
