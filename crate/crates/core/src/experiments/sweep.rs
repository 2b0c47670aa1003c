//! Parameter grids fanned out over worker threads.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{median, pv_sweep};
use super::run::run_scenario;
use super::scenario::{build_scenario, toml_error, ArenaSpec, ScenarioSpec};
use super::summary::scalar_metrics;
use crate::error::{Error, Result};
use crate::units::EnergyTemp;
use crate::world::SettleCriteria;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Robot count.
    Count,
    /// Piston load; each point is settled with the P-V protocol.
    Force,
    /// `policy.kt`.
    Kt,
    /// Share of down-moving crossing robots.
    DownFraction,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Count => "count",
            SweepParam::Force => "force",
            SweepParam::Kt => "kt",
            SweepParam::DownFraction => "down_fraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Scenario file, relative to the sweep file.
    pub base: String,
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub settle: SettleCriteria,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<SweepSpec> {
        let s: SweepSpec = toml::from_str(text).map_err(|e| toml_error(&e))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "empty parameter grid"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "no seeds"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("values", "non-finite entry"));
        }
        Ok(())
    }
}

/// Outcome of one `(value, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub error: Option<String>,
}

/// Medians over the successful rows sharing a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub value: f64,
    pub ok: usize,
    pub failed: usize,
    pub medians: BTreeMap<String, f64>,
}

/// Applies one grid value to the base scenario.
pub fn apply_param(base: &ScenarioSpec, param: SweepParam, value: f64, seed: u64) -> Result<ScenarioSpec> {
    let mut s = base.clone();
    s.seed = seed;
    match param {
        SweepParam::Count => {
            if !(value >= 0.0) || value.fract() != 0.0 {
                return Err(Error::config("values", format!("count {value} is not a whole number")));
            }
            s.robots.count = Some(value as usize);
            s.robots.occupation_ratio = None;
        }
        SweepParam::Force => match &mut s.arena {
            ArenaSpec::Compression(a) => a.force = value,
            _ => return Err(Error::config("param", "force sweeps need a compression base")),
        },
        SweepParam::Kt => s.policy.kt = Some(EnergyTemp::new(value)?),
        SweepParam::DownFraction => s.robots.down_fraction = value,
    }
    s.validate()?;
    Ok(s)
}

fn run_point(base: &ScenarioSpec, spec: &SweepSpec, value: f64, seed: u64) -> Result<BTreeMap<String, f64>> {
    let s = apply_param(base, spec.param, value, seed)?;
    let scenario = build_scenario(&s)?;
    if spec.param == SweepParam::Force {
        let kt = s.policy.kt.ok_or_else(|| Error::config("policy.kt", "required for force sweeps"))?;
        let settle = SettleCriteria { dt: s.dt, ..spec.settle };
        let p = pv_sweep(&scenario, &[value], kt, &settle)?.remove(0)?;
        return Ok(BTreeMap::from([
            ("force".to_string(), p.force),
            ("pressure".to_string(), p.pressure),
            ("settle_time".to_string(), p.settle_time),
            ("volume".to_string(), p.volume),
        ]));
    }
    scalar_metrics(&run_scenario(&scenario)?)
}

/// Runs every `(value, seed)` pair on up to `jobs` threads. Rows come back
/// sorted by value then seed regardless of scheduling.
pub fn run_sweep(base: &ScenarioSpec, spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid: Vec<(f64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| spec.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        grid.par_iter()
            .map(|&(value, seed)| match run_point(base, spec, value, seed) {
                Ok(metrics) => SweepRow {
                    value,
                    seed,
                    metrics,
                    error: None,
                },
                Err(e) => SweepRow {
                    value,
                    seed,
                    metrics: BTreeMap::new(),
                    error: Some(e.to_string()),
                },
            })
            .collect()
    });
    rows.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.seed.cmp(&b.seed)));
    Ok(rows)
}

pub fn aggregate(rows: &[SweepRow]) -> Vec<AggregateRow> {
    let mut by_value: Vec<f64> = rows.iter().map(|r| r.value).collect();
    by_value.sort_by(f64::total_cmp);
    by_value.dedup();
    by_value
        .into_iter()
        .map(|value| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.value == value).collect();
            let ok: Vec<&&SweepRow> = group.iter().filter(|r| r.error.is_none()).collect();
            let keys: BTreeSet<&String> = ok.iter().flat_map(|r| r.metrics.keys()).collect();
            let medians = keys
                .into_iter()
                .filter_map(|k| {
                    let xs: Vec<f64> = ok.iter().filter_map(|r| r.metrics.get(k).copied()).collect();
                    median(&xs).map(|m| (k.clone(), m))
                })
                .collect();
            AggregateRow {
                value,
                ok: ok.len(),
                failed: group.len() - ok.len(),
                medians,
            }
        })
        .collect()
}
