use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use serde_json::{json, Value};

use entroswarm::experiments::{aggregate, build_scenario, run_scenario, run_sweep, ScenarioSpec, SweepSpec};
use entroswarm::io::plots::{phases_chart, pv_chart, scaling_chart, trajectories_chart, PlotKind};
use entroswarm::io::{
    metrics_jsonl, parse_metrics_jsonl, parse_numeric_column, parse_snapshots_csv, parse_summary_csv,
    snapshots_csv, summary_csv, SnapshotRow,
};
use entroswarm::statfit::{compare_phases, fit_exponential, kinematics_from_trajectory};
use entroswarm::Vec2;

const EM_TOL: f64 = 1e-6;
const EM_MAX_ITER: usize = 2_000;

pub struct Ctx {
    pub quiet: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// An error with the exit code it maps to.
pub struct Failure {
    pub error: anyhow::Error,
    pub code: u8,
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        error: error.into(),
        code: 2,
    }
}

fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        error: error.into(),
        code: 1,
    }
}

/// Bad input or configuration exits 2, anything that went wrong while
/// simulating exits 1.
fn classify(e: entroswarm::Error, what: &str) -> Failure {
    use entroswarm::Error as E;
    let code = match e {
        E::Config { .. }
        | E::Parse { .. }
        | E::InvalidArgument { .. }
        | E::EmptySample
        | E::TooFewSamples { .. }
        | E::WrongReportKind { .. }
        | E::InfeasiblePacking { .. }
        | E::DegenerateTemperature(_)
        | E::NonFinite(_) => 2,
        _ => 1,
    };
    Failure {
        error: anyhow::Error::new(e).context(what.to_string()),
        code,
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(usage)
}

fn write(out: &Path, name: &str, contents: &str) -> Outcome {
    let p = out.join(name);
    fs::write(&p, contents)
        .with_context(|| format!("cannot write {}", p.display()))
        .map_err(runtime)
}

fn prepare(out: &Path) -> Outcome {
    fs::create_dir_all(out)
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(runtime)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn load_spec(path: &Path) -> Outcome<ScenarioSpec> {
    let text = read(path)?;
    ScenarioSpec::from_toml(&text).map_err(|e| classify(e, &format!("in {}", path.display())))
}

pub fn run(ctx: &Ctx, config: &Path, out: &Path, seed: Option<u64>) -> Outcome {
    let started = Instant::now();
    let mut spec = load_spec(config)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let what = format!("in {}", config.display());
    let scenario = build_scenario(&spec).map_err(|e| classify(e, &what))?;
    ctx.say(format!(
        "running {} ({} robots, {} s, seed {})",
        spec.name,
        scenario.world.robots.len(),
        spec.duration,
        spec.seed
    ));
    let report = run_scenario(&scenario).map_err(|e| classify(e, "run failed"))?;
    let metrics = metrics_jsonl(&report).map_err(|e| classify(e, "metrics"))?;
    let snaps = snapshots_csv(&report).map_err(|e| classify(e, "snapshots"))?;
    prepare(out)?;
    write(out, "snapshots.csv", &snaps)?;
    write(out, "metrics.jsonl", &metrics)?;
    let manifest = json!({
        "tool": "entroswarm",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "run",
        "config": config.display().to_string(),
        "config_digest": scenario.digest,
        "seed": spec.seed,
        "scenario": spec,
        "outputs": ["snapshots.csv", "metrics.jsonl"],
        "wall_seconds": started.elapsed().as_secs_f64(),
    });
    write(out, "manifest.json", &pretty(&manifest))?;
    ctx.say(format!("wrote {}", out.display()));
    Ok(())
}

pub fn sweep(ctx: &Ctx, config: &Path, out: &Path, jobs: usize) -> Outcome {
    let started = Instant::now();
    let text = read(config)?;
    let what = format!("in {}", config.display());
    let spec = SweepSpec::from_toml(&text).map_err(|e| classify(e, &what))?;
    let base_path = config.parent().unwrap_or(Path::new(".")).join(&spec.base);
    let base = load_spec(&base_path)?;
    base.validate()
        .map_err(|e| classify(e, &format!("in {}", base_path.display())))?;
    ctx.say(format!(
        "sweeping {} over {} values x {} seeds on {} threads",
        spec.param.as_str(),
        spec.values.len(),
        spec.seeds.len(),
        jobs.max(1)
    ));
    let rows = run_sweep(&base, &spec, jobs).map_err(|e| classify(e, &what))?;
    let aggs = aggregate(&rows);
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    prepare(out)?;
    let table = summary_csv(spec.param, &rows, &aggs).map_err(|e| classify(e, "summary"))?;
    write(out, "summary.csv", &table)?;
    let manifest = json!({
        "tool": "entroswarm",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "sweep",
        "config": config.display().to_string(),
        "sweep": spec,
        "base_digest": base.digest(),
        "base": base,
        "rows": rows.len(),
        "failed": failed,
        "outputs": ["summary.csv"],
        "wall_seconds": started.elapsed().as_secs_f64(),
    });
    write(out, "manifest.json", &pretty(&manifest))?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        ctx.say(format!(
            "row {}={} seed {} failed: {}",
            spec.param.as_str(),
            r.value,
            r.seed,
            r.error.as_deref().unwrap_or("")
        ));
    }
    if failed == rows.len() {
        return Err(runtime(anyhow!("every sweep row failed")));
    }
    ctx.say(format!("wrote {} ({} of {} rows ok)", out.display(), rows.len() - failed, rows.len()));
    Ok(())
}

/// Both models' fits and KS reports; the one-phase fit alone for `exp1`.
fn fit_json(samples: &[f64], two_phase: bool) -> Result<Value, entroswarm::Error> {
    if !two_phase {
        let f = fit_exponential(samples)?;
        let ks = f.ks(samples)?;
        return Ok(json!({"model": "exp1", "n": samples.len(), "exp1": {"fit": f, "ks": ks}}));
    }
    let c = compare_phases(samples, EM_TOL, EM_MAX_ITER)?;
    Ok(json!({
        "model": "exp2mix",
        "n": samples.len(),
        "exp1": {"fit": c.one_phase, "ks": c.one_phase_ks},
        "exp2mix": {"fit": c.two_phase, "ks": c.two_phase_ks},
        "ks_improvement": c.ks_improvement(),
        "prefers_two_phase": c.prefers_two_phase(),
    }))
}

pub fn fit(ctx: &Ctx, data: &Path, two_phase: bool, out: &Path) -> Outcome {
    let text = read(data)?;
    let what = format!("in {}", data.display());
    let samples = parse_numeric_column(&text).map_err(|e| classify(e, &what))?;
    if let Some(bad) = samples.iter().find(|x| **x < 0.0) {
        return Err(usage(anyhow!("{what}: negative energy {bad}")));
    }
    let result = fit_json(&samples, two_phase).map_err(|e| classify(e, &what))?;
    prepare(out)?;
    write(out, "fit.json", &pretty(&result))?;
    ctx.say(format!("fitted {} samples, wrote {}", samples.len(), out.join("fit.json").display()));
    Ok(())
}

/// Snapshot spacing: the median gap between distinct snapshot times.
fn snapshot_dt(rows: &[SnapshotRow]) -> Option<f64> {
    let mut ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut gaps: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    gaps.get(gaps.len() / 2).copied()
}

pub fn analyze(ctx: &Ctx, data: &Path, out: &Path) -> Outcome {
    let text = read(data)?;
    let what = format!("in {}", data.display());
    let rows = parse_snapshots_csv(&text).map_err(|e| classify(e, &what))?;
    let dt = snapshot_dt(&rows).ok_or_else(|| usage(anyhow!("{what}: need at least two snapshot times")))?;
    let mut tracks: BTreeMap<usize, Vec<(f64, Vec2)>> = BTreeMap::new();
    for r in &rows {
        tracks.entry(r.id).or_default().push((r.t, Vec2::new(r.x, r.y)));
    }
    let (mut energies, mut rates) = (Vec::new(), Vec::new());
    for track in tracks.values_mut() {
        track.sort_by(|a, b| a.0.total_cmp(&b.0));
        let pts: Vec<Vec2> = track.iter().map(|p| p.1).collect();
        if let Ok(k) = kinematics_from_trajectory(&pts, dt) {
            energies.extend(k.speeds.iter().map(|v| 0.5 * v * v));
            rates.extend(k.steering_rates.iter().map(|w| w.abs()));
        }
    }
    if energies.is_empty() {
        return Err(usage(anyhow!("{what}: no robot has three or more snapshots")));
    }
    let fits = fit_json(&energies, true).map_err(|e| classify(e, &what))?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let mut phases: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &rows {
        *phases.entry(r.phase.as_str()).or_default() += 1;
    }
    let result = json!({
        "robots": tracks.len(),
        "snapshot_dt": dt,
        "samples": energies.len(),
        "mean_energy": mean(&energies),
        "mean_abs_steering_rate": mean(&rates),
        "phase_rows": phases,
        "fits": fits,
    });
    prepare(out)?;
    write(out, "analysis.json", &pretty(&result))?;
    ctx.say(format!("analyzed {} robots, wrote {}", tracks.len(), out.join("analysis.json").display()));
    Ok(())
}

pub fn plot(ctx: &Ctx, input: &Path, kind: PlotKind, out: &Path) -> Outcome {
    let text = read(input)?;
    let what = format!("in {}", input.display());
    let err = |e| classify(e, &what);
    let (chart, name) = match kind {
        PlotKind::Pv => (pv_chart(&parse_summary_csv(&text).map_err(err)?).map_err(err)?, "pv.svg"),
        PlotKind::Scaling => (scaling_chart(&parse_summary_csv(&text).map_err(err)?).map_err(err)?, "scaling.svg"),
        PlotKind::Phases => (phases_chart(&parse_metrics_jsonl(&text).map_err(err)?).map_err(err)?, "phases.svg"),
        PlotKind::Trajectories => (
            trajectories_chart(&parse_snapshots_csv(&text).map_err(err)?).map_err(err)?,
            "trajectories.svg",
        ),
    };
    let svg = chart.render().map_err(err)?;
    prepare(out)?;
    write(out, name, &svg)?;
    ctx.say(format!("wrote {}", out.join(name).display()));
    Ok(())
}
