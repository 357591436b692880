//! CSV ingestion of project records.
//!
//! Header: `id,name,project_type,region,decision_year,completion_year,
//! estimated_cost,actual_cost,estimated_traffic,actual_traffic`.
//! An empty cell is an absent optional field.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

use super::record::ProjectRecord;

pub const HEADER: [&str; 10] = [
    "id",
    "name",
    "project_type",
    "region",
    "decision_year",
    "completion_year",
    "estimated_cost",
    "actual_cost",
    "estimated_traffic",
    "actual_traffic",
];

struct Row<'a> {
    number: usize,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn raw(&self, col: usize) -> &str {
        self.record.get(col).unwrap_or("").trim()
    }

    fn malformed(&self, col: usize, message: impl Into<String>) -> Error {
        Error::MalformedRow {
            row: self.number,
            field: HEADER[col].to_string(),
            message: message.into(),
        }
    }

    fn required_str(&self, col: usize) -> Result<String> {
        let v = self.raw(col);
        if v.is_empty() {
            return Err(self.malformed(col, "required field is empty"));
        }
        Ok(v.to_string())
    }

    fn parse<T: FromStr>(&self, col: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(col);
        if v.is_empty() {
            return Err(self.malformed(col, "required field is empty"));
        }
        v.parse::<T>()
            .map_err(|e| self.malformed(col, format!("cannot parse `{v}`: {e}")))
    }

    fn optional<T: FromStr>(&self, col: usize) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(col).is_empty() {
            Ok(None)
        } else {
            self.parse(col).map(Some)
        }
    }
}

/// Reads and validates project records, preserving row order.
///
/// Row numbers in errors count data rows from 1 (the header is not counted).
pub fn parse_dataset<R: Read>(source: R) -> Result<Vec<ProjectRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(source);

    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != HEADER {
        return Err(Error::MalformedRow {
            row: 0,
            field: "header".into(),
            message: format!(
                "expected `{}`, found `{}`",
                HEADER.join(","),
                found.join(",")
            ),
        });
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let number = idx + 1;
        let rec = rec.map_err(|e| Error::MalformedRow {
            row: number,
            field: "*".into(),
            message: e.to_string(),
        })?;
        let row = Row {
            number,
            record: &rec,
        };
        let record = ProjectRecord {
            id: row.required_str(0)?,
            name: row.raw(1).to_string(),
            project_type: row.parse(2)?,
            region: row.parse(3)?,
            decision_year: row.parse(4)?,
            completion_year: row.optional(5)?,
            estimated_cost: row.parse(6)?,
            actual_cost: row.optional(7)?,
            estimated_traffic: row.optional(8)?,
            actual_traffic: row.optional(9)?,
        };
        record.check().map_err(|invariant| Error::Invariant {
            row: number,
            invariant,
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                row: number,
                id: record.id,
            });
        }
        out.push(record);
    }
    Ok(out)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records in the ingestion schema. Floats use shortest round-trip
/// formatting, so `parse_dataset(write_dataset(x)) == x`.
pub fn write_dataset<W: Write>(records: &[ProjectRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.id.clone(),
            r.name.clone(),
            r.project_type.to_string(),
            r.region.to_string(),
            r.decision_year.to_string(),
            opt(r.completion_year),
            r.estimated_cost.to_string(),
            opt(r.actual_cost),
            opt(r.estimated_traffic),
            opt(r.actual_traffic),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::record::{ProjectType, Region};

    const HEAD: &str = "id,name,project_type,region,decision_year,completion_year,estimated_cost,actual_cost,estimated_traffic,actual_traffic\n";

    #[test]
    fn one_row() {
        let src = format!("{HEAD}a1,Tram,rail,europe,1990,1997,100,180,,\n");
        let recs = parse_dataset(src.as_bytes()).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.project_type, ProjectType::Rail);
        assert_eq!(r.region, Region::Europe);
        assert_eq!(r.estimated_cost, 100.0);
        assert_eq!(r.actual_cost, Some(180.0));
        assert_eq!(r.estimated_traffic, None);
    }

    #[test]
    fn zero_estimate_rejected() {
        let src = format!("{HEAD}a1,Tram,rail,europe,1990,,0,180,,\n");
        let err = parse_dataset(src.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("nonpositive estimate"), "{err}");
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn malformed_field_named() {
        let src = format!("{HEAD}a1,x,rail,europe,1990,,100,,,\na2,y,rail,mars,1990,,100,,,\n");
        match parse_dataset(src.as_bytes()).unwrap_err() {
            Error::MalformedRow { row, field, .. } => {
                assert_eq!(row, 2);
                assert_eq!(field, "region");
            }
            other => panic!("unexpected {other}"),
        }
        let src = format!("{HEAD}a1,x,rail,europe,19x0,,100,,,\n");
        let err = parse_dataset(src.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("decision_year"), "{err}");
    }

    #[test]
    fn duplicate_id() {
        let src = format!("{HEAD}a1,x,rail,europe,1990,,100,,,\na1,y,road,europe,1990,,100,,,\n");
        assert!(matches!(
            parse_dataset(src.as_bytes()),
            Err(Error::DuplicateId { row: 2, .. })
        ));
    }

    #[test]
    fn wrong_header() {
        let src = "id,name\n1,2\n";
        assert!(parse_dataset(src.as_bytes()).is_err());
    }

    #[test]
    fn write_then_parse() {
        let src = format!(
            "{HEAD}a1,\"Tram, line 2\",rail,europe,1990,1997,100.25,180.125,1000,486\nb2,Link,ict,other,2001,,3.3333333333333335,,,\n"
        );
        let recs = parse_dataset(src.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_dataset(&recs, &mut buf).unwrap();
        assert_eq!(parse_dataset(buf.as_slice()).unwrap(), recs);
    }
}
