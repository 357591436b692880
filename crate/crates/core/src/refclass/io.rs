//! Reference class exchange format (`project_id,value`) and plot-ready
//! distribution exports.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::Deserialize;

use crate::dataset::{InaccuracyKind, InaccuracyObservation};
use crate::error::{Error, Result};

use super::{ClassFilter, EmpiricalDistribution, ReferenceClass};

#[derive(Debug, Deserialize)]
struct ClassRow {
    project_id: String,
    value: f64,
}

pub fn write_class<W: Write>(class: &ReferenceClass, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["project_id", "value"])?;
    for o in &class.observations {
        w.write_record([o.project_id.clone(), format!("{}", o.value)])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Reads an exported class. The filter of an imported class is unknown, so
/// it matches everything and only requires two observations.
pub fn read_class<R: Read>(
    source: R,
    kind: InaccuracyKind,
    provenance: &str,
) -> Result<ReferenceClass> {
    let mut reader = csv::Reader::from_reader(source);
    let mut seen = HashSet::new();
    let mut observations = Vec::new();
    for (idx, row) in reader.deserialize::<ClassRow>().enumerate() {
        let row = row.map_err(|e| Error::MalformedRow {
            row: idx + 1,
            field: "project_id,value".into(),
            message: e.to_string(),
        })?;
        if !row.value.is_finite() {
            return Err(Error::MalformedRow {
                row: idx + 1,
                field: "value".into(),
                message: format!("non-finite value {}", row.value),
            });
        }
        if !seen.insert(row.project_id.clone()) {
            return Err(Error::DuplicateId {
                row: idx + 1,
                id: row.project_id,
            });
        }
        observations.push(InaccuracyObservation {
            project_id: row.project_id,
            kind,
            value: row.value,
        });
    }
    let filter = ClassFilter::default().with_min_size(2);
    if observations.len() < filter.min_size {
        return Err(Error::ClassTooSmall {
            count: observations.len(),
            min_size: filter.min_size,
        });
    }
    Ok(ReferenceClass {
        filter,
        kind,
        observations,
        provenance: provenance.to_string(),
    })
}

/// `q,quantile_value` at q = 0.00 .. 1.00 in steps of 0.01.
pub fn write_quantile_grid<W: Write>(dist: &EmpiricalDistribution, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["q", "quantile_value"])?;
    for (q, v) in dist.quantile_grid() {
        w.write_record([format!("{q}"), format!("{v}")])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// `bin_lo,bin_hi,count` histogram rows.
pub fn write_histogram<W: Write>(dist: &EmpiricalDistribution, bins: usize, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["bin_lo", "bin_hi", "count"])?;
    for (lo, hi, c) in dist.histogram(bins)? {
        w.write_record([format!("{lo}"), format!("{hi}"), c.to_string()])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
