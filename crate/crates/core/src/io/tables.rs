use std::collections::BTreeMap;

use super::sig9;
use crate::error::{Error, Result};
use crate::experiments::{AggregateRow, RunReport, SweepParam, SweepRow};
use crate::world::Phase;

pub const SNAPSHOT_HEADER: [&str; 7] = ["t", "id", "x", "y", "heading", "speed", "phase"];

fn write_err(e: impl std::fmt::Display) -> Error {
    Error::Parse {
        line: 0,
        reason: e.to_string(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(write_err)?;
    String::from_utf8(bytes).map_err(write_err)
}

fn csv_line(e: &csv::Error) -> usize {
    e.position().map_or(0, |p| p.line() as usize)
}

/// One line per robot per snapshot; heading in degrees.
pub fn snapshots_csv(r: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SNAPSHOT_HEADER).map_err(write_err)?;
    for s in &r.snapshots {
        for rb in &s.robots {
            w.write_record([
                sig9(s.t),
                rb.id.to_string(),
                sig9(rb.pos.x),
                sig9(rb.pos.y),
                sig9(rb.heading.degrees()),
                sig9(rb.speed),
                rb.phase.as_str().to_string(),
            ])
            .map_err(write_err)?;
        }
    }
    finish(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub t: f64,
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub phase: Phase,
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, line: usize, what: &str) -> Result<T> {
    rec.get(k)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parse {
            line,
            reason: format!("bad {what}: {:?}", rec.get(k).unwrap_or("")),
        })
}

fn finite(x: f64, line: usize, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Parse {
            line,
            reason: format!("non-finite {what}"),
        })
    }
}

pub fn parse_snapshots_csv(text: &str) -> Result<Vec<SnapshotRow>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| Error::Parse {
        line: 1,
        reason: e.to_string(),
    })?;
    if header.iter().map(str::trim).ne(SNAPSHOT_HEADER) {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header {}", SNAPSHOT_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: csv_line(&e),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let phase = rec.get(6).and_then(|s| Phase::parse(s.trim())).ok_or_else(|| Error::Parse {
            line,
            reason: "bad phase".into(),
        })?;
        out.push(SnapshotRow {
            t: finite(field(&rec, 0, line, "t")?, line, "t")?,
            id: field(&rec, 1, line, "id")?,
            x: finite(field(&rec, 2, line, "x")?, line, "x")?,
            y: finite(field(&rec, 3, line, "y")?, line, "y")?,
            heading: finite(field(&rec, 4, line, "heading")?, line, "heading")?,
            speed: finite(field(&rec, 5, line, "speed")?, line, "speed")?,
            phase,
        });
    }
    Ok(out)
}

/// Reads the energies to fit from a CSV: a bare single column, or a header
/// naming an `energy` column, or a `speed` column converted to `v²/2`.
pub fn parse_numeric_column(text: &str) -> Result<Vec<f64>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rd.records().peekable();
    let first = match records.peek() {
        None => return Err(Error::EmptySample),
        Some(Err(e)) => {
            return Err(Error::Parse {
                line: csv_line(e),
                reason: e.to_string(),
            })
        }
        Some(Ok(r)) => r.clone(),
    };
    let numeric_first = first.iter().all(|s| s.parse::<f64>().is_ok());
    let (col, square) = if numeric_first {
        if first.len() != 1 {
            return Err(Error::Parse {
                line: 1,
                reason: "headerless input must have one column".into(),
            });
        }
        (0, false)
    } else {
        records.next();
        let names: Vec<&str> = first.iter().collect();
        if let Some(k) = names.iter().position(|n| *n == "energy") {
            (k, false)
        } else if let Some(k) = names.iter().position(|n| *n == "speed") {
            (k, true)
        } else if names.len() == 1 {
            (0, false)
        } else {
            return Err(Error::Parse {
                line: 1,
                reason: "no `energy` or `speed` column".into(),
            });
        }
    };
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse {
            line: csv_line(&e),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let x: f64 = finite(field(&rec, col, line, "number")?, line, "number")?;
        out.push(if square { 0.5 * x * x } else { x });
    }
    if out.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(out)
}

/// Sweep results: one `run` row per point and one `median` row per value.
pub fn summary_csv(param: SweepParam, rows: &[SweepRow], aggs: &[AggregateRow]) -> Result<String> {
    let mut keys: Vec<&String> = rows.iter().flat_map(|r| r.metrics.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row", "param", "value", "seed", "ok", "failed"];
    header.extend(keys.iter().map(|k| k.as_str()));
    header.push("error");
    w.write_record(&header).map_err(write_err)?;
    let metric_cells = |m: &BTreeMap<String, f64>| -> Vec<String> {
        keys.iter().map(|k| m.get(*k).map(|v| sig9(*v)).unwrap_or_default()).collect()
    };
    for r in rows {
        let ok = r.error.is_none();
        let mut rec = vec![
            "run".to_string(),
            param.as_str().to_string(),
            sig9(r.value),
            r.seed.to_string(),
            u8::from(ok).to_string(),
            u8::from(!ok).to_string(),
        ];
        rec.extend(metric_cells(&r.metrics));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(write_err)?;
    }
    for a in aggs {
        let mut rec = vec![
            "median".to_string(),
            param.as_str().to_string(),
            sig9(a.value),
            String::new(),
            a.ok.to_string(),
            a.failed.to_string(),
        ];
        rec.extend(metric_cells(&a.medians));
        rec.push(String::new());
        w.write_record(&rec).map_err(write_err)?;
    }
    finish(w)
}

/// A parsed summary CSV, cells kept as text.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SummaryTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose `row` cell equals `kind` (`run` or `median`).
    pub fn rows_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Vec<String>> + 'a {
        let k = self.column("row");
        self.rows.iter().filter(move |r| k.is_some_and(|k| r[k] == kind))
    }

    /// `(x, y)` pairs of the given kind where both cells parse.
    pub fn pairs(&self, kind: &str, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
        let missing = |c: &str| Error::Parse {
            line: 1,
            reason: format!("no `{c}` column"),
        };
        let xi = self.column(x).ok_or_else(|| missing(x))?;
        let yi = self.column(y).ok_or_else(|| missing(y))?;
        Ok(self
            .rows_of(kind)
            .filter_map(|r| Some((r[xi].parse().ok()?, r[yi].parse().ok()?)))
            .filter(|(a, b): &(f64, f64)| a.is_finite() && b.is_finite())
            .collect())
    }
}

pub fn parse_summary_csv(text: &str) -> Result<SummaryTable> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let columns: Vec<String> = rd
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            reason: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    for need in ["row", "param", "value"] {
        if !columns.iter().any(|c| c == need) {
            return Err(Error::Parse {
                line: 1,
                reason: format!("missing `{need}` column"),
            });
        }
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: csv_line(&e),
            reason: e.to_string(),
        })?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(SummaryTable { columns, rows })
}
