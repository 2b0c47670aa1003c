use serde_json::{json, Map, Value};

use super::round9;
use crate::error::{Error, Result};
use crate::experiments::{phase_census, scalar_metrics, RunReport};
use crate::policies::{GoalDir, PolicyKind};

fn num(x: f64) -> Value {
    json!(round9(x))
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// The run as a sequence of events: start, payload positions, pressure
/// windows, phase census rows, crossing exits, contact stats, summary.
/// Wall-clock time is left out so reruns compare equal.
pub fn metrics_events(r: &RunReport) -> Result<Vec<Value>> {
    let mut ev = vec![json!({
        "event": "run_start",
        "name": r.name,
        "kind": r.kind.as_str(),
        "seed": r.seed,
        "digest": r.digest,
        "robots": r.snapshots.first().map_or(0, |s| s.robots.len()),
        "ticks": r.ticks,
    })];
    for s in &r.snapshots {
        if let Some(p) = s.payload {
            ev.push(json!({"event": "payload", "t": num(s.t), "x": num(p.x), "y": num(p.y)}));
        }
    }
    for p in &r.pressure {
        ev.push(json!({
            "event": "pressure",
            "t0": num(p.window.0),
            "t1": num(p.window.1),
            "pressure": num(p.pressure),
            "volume": num(p.volume),
        }));
    }
    if r.kind == PolicyKind::TransportFree {
        for c in phase_census(r)? {
            ev.push(json!({
                "event": "census",
                "t": num(c.t),
                "gas": c.gas,
                "liquid": c.liquid,
                "mean_energy_gas": opt(c.mean_energy_gas),
                "mean_energy_liquid": opt(c.mean_energy_liquid),
                "gas_density": opt(c.gas_density),
                "liquid_density": opt(c.liquid_density),
            }));
        }
    }
    if let Some(log) = &r.crossing {
        for e in &log.exits {
            let dir = match e.dir {
                GoalDir::Up => "up",
                GoalDir::Down => "down",
            };
            ev.push(json!({"event": "exit", "t": num(e.t), "id": e.id, "dir": dir}));
        }
    }
    ev.push(json!({
        "event": "contact",
        "max_residual": num(r.contact.max_residual),
        "residual_events": r.contact.residual_events,
    }));
    let metrics: Map<String, Value> = scalar_metrics(r)?.into_iter().map(|(k, v)| (k, num(v))).collect();
    ev.push(json!({"event": "summary", "metrics": metrics}));
    Ok(ev)
}

/// One JSON object per line, keys sorted.
pub fn metrics_jsonl(r: &RunReport) -> Result<String> {
    let mut out = String::new();
    for e in metrics_events(r)? {
        out.push_str(&serde_json::to_string(&e).map_err(|e| Error::Parse {
            line: 0,
            reason: e.to_string(),
        })?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses a metrics log; every non-blank line must be an object with a
/// string `event` field.
pub fn parse_metrics_jsonl(text: &str) -> Result<Vec<Value>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: k + 1,
            reason: e.to_string(),
        })?;
        if !v.get("event").is_some_and(Value::is_string) {
            return Err(Error::Parse {
                line: k + 1,
                reason: "object without a string `event`".into(),
            });
        }
        out.push(v);
    }
    Ok(out)
}
