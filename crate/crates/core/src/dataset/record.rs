use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectType {
    Rail,
    Road,
    BridgeTunnel,
    Ict,
    Other,
}

impl ProjectType {
    pub const ALL: [ProjectType; 5] = [
        ProjectType::Rail,
        ProjectType::Road,
        ProjectType::BridgeTunnel,
        ProjectType::Ict,
        ProjectType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProjectType::Rail => "rail",
            ProjectType::Road => "road",
            ProjectType::BridgeTunnel => "bridge_tunnel",
            ProjectType::Ict => "ict",
            ProjectType::Other => "other",
        }
    }
}

impl fmt::Display for ProjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ProjectType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown project type `{s}` (expected rail, road, bridge_tunnel, ict or other)"
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Europe,
    NorthAmerica,
    Emerging,
    Other,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::Europe,
        Region::NorthAmerica,
        Region::Emerging,
        Region::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Europe => "europe",
            Region::NorthAmerica => "north_america",
            Region::Emerging => "emerging",
            Region::Other => "other",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Region::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                format!("unknown region `{s}` (expected europe, north_america, emerging or other)")
            })
    }
}

/// One historical or candidate project.
///
/// Costs are construction costs in constant prices. No deflation is applied
/// anywhere in this crate; converting nominal figures is the caller's job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    pub name: String,
    pub project_type: ProjectType,
    pub region: Region,
    pub decision_year: i32,
    pub completion_year: Option<i32>,
    pub estimated_cost: f64,
    pub actual_cost: Option<f64>,
    pub estimated_traffic: Option<f64>,
    pub actual_traffic: Option<f64>,
}

impl ProjectRecord {
    /// Checks the record-level invariants, returning the violated one as text.
    pub fn check(&self) -> std::result::Result<(), String> {
        if !(self.estimated_cost > 0.0) || !self.estimated_cost.is_finite() {
            return Err("nonpositive estimate: estimated_cost must be > 0".into());
        }
        if let Some(actual) = self.actual_cost {
            if !(actual > 0.0) || !actual.is_finite() {
                return Err("nonpositive outturn: actual_cost must be > 0".into());
            }
        }
        if let Some(done) = self.completion_year {
            if done < self.decision_year {
                return Err("completion_year precedes decision_year".into());
            }
        }
        if let Some(est) = self.estimated_traffic {
            if !(est > 0.0) || !est.is_finite() {
                return Err("nonpositive traffic forecast: estimated_traffic must be > 0".into());
            }
        }
        if let Some(act) = self.actual_traffic {
            if act < 0.0 || !act.is_finite() {
                return Err("negative actual_traffic".into());
            }
            if self.estimated_traffic.is_none() {
                return Err("actual_traffic present without estimated_traffic".into());
            }
        }
        Ok(())
    }

    pub fn has_outturn(&self) -> bool {
        self.actual_cost.is_some()
    }

    pub fn has_traffic(&self) -> bool {
        self.estimated_traffic.is_some() && self.actual_traffic.is_some()
    }
}

/// Which forecast the inaccuracy measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InaccuracyKind {
    CostOverrun,
    TrafficInaccuracy,
}

impl InaccuracyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InaccuracyKind::CostOverrun => "cost_overrun",
            InaccuracyKind::TrafficInaccuracy => "traffic_inaccuracy",
        }
    }
}

impl fmt::Display for InaccuracyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InaccuracyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cost" | "cost_overrun" => Ok(InaccuracyKind::CostOverrun),
            "traffic" | "traffic_inaccuracy" => Ok(InaccuracyKind::TrafficInaccuracy),
            other => Err(format!(
                "unknown inaccuracy kind `{other}` (expected cost or traffic)"
            )),
        }
    }
}

/// A single percent inaccuracy, e.g. `44.7` for a 44.7% overrun.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InaccuracyObservation {
    pub project_id: String,
    pub kind: InaccuracyKind,
    pub value: f64,
}

/// Actual out-turn cost minus estimated cost, in percent of the estimate.
pub fn cost_overrun(record: &ProjectRecord) -> Result<f64> {
    let actual = record
        .actual_cost
        .ok_or_else(|| Error::MissingOutturn(record.id.clone()))?;
    Ok(100.0 * (actual - record.estimated_cost) / record.estimated_cost)
}

/// Actual traffic minus forecast traffic, in percent of the forecast.
pub fn traffic_inaccuracy(record: &ProjectRecord) -> Result<f64> {
    match (record.estimated_traffic, record.actual_traffic) {
        (Some(est), Some(act)) if est > 0.0 => Ok(100.0 * (act - est) / est),
        _ => Err(Error::MissingTraffic(record.id.clone())),
    }
}

/// Restates "actual fell short of forecast by x%" as "forecast exceeded
/// actual by y%". A shortfall of 50% is a 100% overestimate.
pub fn overestimate_from_shortfall(inaccuracy: f64) -> Result<f64> {
    if !(inaccuracy > -100.0) {
        return Err(Error::TotalShortfall(inaccuracy));
    }
    let i = inaccuracy / 100.0;
    Ok(100.0 * (-i / (1.0 + i)))
}

/// Inverse of [`overestimate_from_shortfall`].
pub fn shortfall_from_overestimate(overestimate: f64) -> Result<f64> {
    if !(overestimate > -100.0) {
        return Err(Error::domain(format!(
            "overestimate {overestimate}% must exceed -100%"
        )));
    }
    let o = overestimate / 100.0;
    Ok(100.0 * (-o / (1.0 + o)))
}

/// Computes the requested inaccuracy for one record.
pub fn observe(record: &ProjectRecord, kind: InaccuracyKind) -> Result<InaccuracyObservation> {
    let value = match kind {
        InaccuracyKind::CostOverrun => cost_overrun(record)?,
        InaccuracyKind::TrafficInaccuracy => traffic_inaccuracy(record)?,
    };
    Ok(InaccuracyObservation {
        project_id: record.id.clone(),
        kind,
        value,
    })
}

/// Observations of `kind` for every record that carries the needed data.
/// Records lacking outturns are skipped silently.
pub fn observations(records: &[ProjectRecord], kind: InaccuracyKind) -> Vec<InaccuracyObservation> {
    records
        .iter()
        .filter_map(|r| observe(r, kind).ok())
        .collect()
}
