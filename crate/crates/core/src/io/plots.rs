//! The chart kinds the command line can draw from run and sweep outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::svg::{Chart, Series, Style};
use super::tables::{SnapshotRow, SummaryTable};
use crate::error::{Error, Result};
use crate::experiments::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Pressure against volume from a force sweep summary.
    Pv,
    /// Median displacement against robot count from a count sweep summary.
    Scaling,
    /// Gas and liquid counts over time from a metrics log.
    Phases,
    /// Robot paths from a snapshots file.
    Trajectories,
}

impl PlotKind {
    pub fn parse(s: &str) -> Option<PlotKind> {
        match s {
            "pv" => Some(PlotKind::Pv),
            "scaling" => Some(PlotKind::Scaling),
            "phases" => Some(PlotKind::Phases),
            "trajectories" => Some(PlotKind::Trajectories),
            _ => None,
        }
    }
}

const PRESSURE_LABEL: &str = "pressure P (mass/s² per mm of wall)";
const VOLUME_LABEL: &str = "volume V (mm²)";

/// One marker per run row; the title carries the log-log slope.
pub fn pv_chart(t: &SummaryTable) -> Result<Chart> {
    let pts = t.pairs("run", "volume", "pressure")?;
    if pts.is_empty() {
        return Err(Error::EmptySample);
    }
    let title = match pts.iter().filter(|(v, p)| *v > 0.0 && *p > 0.0).count() {
        n if n >= 2 => {
            let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|(v, p)| (v.ln(), p.ln())).unzip();
            let (_, b, _) = linear_fit(&lx, &ly)?;
            format!("pressure vs volume, log-log slope {b:.3}")
        }
        _ => "pressure vs volume".to_string(),
    };
    let mut ch = Chart::new(&title, VOLUME_LABEL, PRESSURE_LABEL);
    ch.log_x = true;
    ch.log_y = true;
    ch.series.push(Series {
        label: "runs".into(),
        style: Style::Markers,
        points: pts,
    });
    Ok(ch)
}

pub fn scaling_chart(t: &SummaryTable) -> Result<Chart> {
    let k = t.column("param").ok_or(Error::EmptySample)?;
    if t.rows.iter().any(|r| r[k] != "count") {
        return Err(Error::WrongReportKind {
            expected: "count sweep summary",
        });
    }
    let runs = t.pairs("run", "value", "max_displacement")?;
    let medians = t.pairs("median", "value", "max_displacement")?;
    if runs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut ch = Chart::new(
        "goal-ward payload displacement vs swarm size",
        "robots N",
        "max displacement (mm)",
    );
    ch.series.push(Series {
        label: "runs".into(),
        style: Style::Markers,
        points: runs,
    });
    ch.series.push(Series {
        label: "median".into(),
        style: Style::Line,
        points: medians,
    });
    Ok(ch)
}

pub fn phases_chart(events: &[Value]) -> Result<Chart> {
    let census: Vec<&Value> = events.iter().filter(|e| e["event"] == "census").collect();
    if census.is_empty() {
        return Err(Error::WrongReportKind {
            expected: "transport_free metrics with census events",
        });
    }
    let pick = |key: &str| -> Vec<(f64, f64)> {
        census
            .iter()
            .filter_map(|e| Some((e["t"].as_f64()?, e[key].as_f64()?)))
            .collect()
    };
    let mut ch = Chart::new("phase census", "time t (s)", "robots");
    ch.series.push(Series {
        label: "gas".into(),
        style: Style::Line,
        points: pick("gas"),
    });
    ch.series.push(Series {
        label: "liquid".into(),
        style: Style::Line,
        points: pick("liquid"),
    });
    Ok(ch)
}

pub fn trajectories_chart(rows: &[SnapshotRow]) -> Result<Chart> {
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut tracks: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        tracks.entry(r.id).or_default().push((r.x, r.y));
    }
    let mut ch = Chart::new("robot trajectories", "x (mm)", "y (mm)");
    ch.equal_aspect = true;
    ch.series = tracks
        .into_iter()
        .map(|(id, points)| Series {
            label: format!("robot {id}"),
            style: Style::Line,
            points,
        })
        .collect();
    Ok(ch)
}
