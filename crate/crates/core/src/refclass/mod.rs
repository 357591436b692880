//! Reference classes of comparable past projects and their empirical
//! distributions of forecast inaccuracy.

pub mod bootstrap;
pub mod distribution;
pub mod io;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::{
    observations, InaccuracyKind, InaccuracyObservation, ProjectRecord, ProjectType, Region,
};
use crate::error::{Error, Result};

pub use bootstrap::{bootstrap_ci, BootstrapStatistic};
pub use distribution::EmpiricalDistribution;

pub const DEFAULT_MIN_SIZE: usize = 10;

/// Classes smaller than this build, but with a warning.
pub const RECOMMENDED_MIN_SIZE: usize = 30;

/// Explicit comparability filter. Empty type or region sets match anything.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassFilter {
    pub project_types: BTreeSet<ProjectType>,
    pub regions: BTreeSet<Region>,
    pub year_range: Option<(i32, i32)>,
    pub min_size: usize,
}

impl Default for ClassFilter {
    fn default() -> Self {
        ClassFilter {
            project_types: BTreeSet::new(),
            regions: BTreeSet::new(),
            year_range: None,
            min_size: DEFAULT_MIN_SIZE,
        }
    }
}

impl ClassFilter {
    pub fn types(types: impl IntoIterator<Item = ProjectType>) -> Self {
        ClassFilter {
            project_types: types.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn with_regions(mut self, regions: impl IntoIterator<Item = Region>) -> Self {
        self.regions = regions.into_iter().collect();
        self
    }

    pub fn with_years(mut self, min: i32, max: i32) -> Self {
        self.year_range = Some((min, max));
        self
    }

    pub fn with_min_size(mut self, min_size: usize) -> Self {
        self.min_size = min_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_size < 2 {
            return Err(Error::config(format!(
                "min_size {} must be at least 2",
                self.min_size
            )));
        }
        if let Some((lo, hi)) = self.year_range {
            if lo > hi {
                return Err(Error::config(format!("year range {lo}..{hi} is reversed")));
            }
        }
        Ok(())
    }

    pub fn matches(&self, record: &ProjectRecord) -> bool {
        (self.project_types.is_empty() || self.project_types.contains(&record.project_type))
            && (self.regions.is_empty() || self.regions.contains(&record.region))
            && self
                .year_range
                .is_none_or(|(lo, hi)| (lo..=hi).contains(&record.decision_year))
    }

    /// Short label such as `rail+road/emerging/1960-1999`.
    pub fn label(&self) -> String {
        fn join<T: std::fmt::Display>(set: &BTreeSet<T>) -> String {
            if set.is_empty() {
                "any".to_string()
            } else {
                set.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("+")
            }
        }
        let mut s = format!("{}/{}", join(&self.project_types), join(&self.regions));
        if let Some((lo, hi)) = self.year_range {
            let _ = write!(s, "/{lo}-{hi}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceClass {
    pub filter: ClassFilter,
    pub kind: InaccuracyKind,
    pub observations: Vec<InaccuracyObservation>,
    /// Where the observations came from, typically a dataset path.
    pub provenance: String,
}

impl ReferenceClass {
    pub fn id(&self) -> String {
        format!("{}:{}@{}", self.kind, self.filter.label(), self.provenance)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }

    pub fn distribution(&self) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::new(self.values())
    }
}

/// Collects the `kind` inaccuracies of every record matching `filter`.
/// Records without the needed outturn data never enter a class.
pub fn build_reference_class(
    dataset: &[ProjectRecord],
    filter: &ClassFilter,
    kind: InaccuracyKind,
    provenance: &str,
) -> Result<ReferenceClass> {
    filter.validate()?;
    let matching: Vec<ProjectRecord> = dataset
        .iter()
        .filter(|r| filter.matches(r))
        .cloned()
        .collect();
    let obs = observations(&matching, kind);
    if obs.len() < filter.min_size {
        return Err(Error::ClassTooSmall {
            count: obs.len(),
            min_size: filter.min_size,
        });
    }
    if obs.len() < RECOMMENDED_MIN_SIZE {
        log::warn!(
            "reference class {} has only {} observations; fewer than {} is weak evidence",
            filter.label(),
            obs.len(),
            RECOMMENDED_MIN_SIZE
        );
    }
    Ok(ReferenceClass {
        filter: filter.clone(),
        kind,
        observations: obs,
        provenance: provenance.to_string(),
    })
}
