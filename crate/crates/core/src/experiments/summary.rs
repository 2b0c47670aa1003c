//! Named scalar results of a run, shared by the metrics log and sweeps.

use std::collections::BTreeMap;

use super::metrics::{crossing_metrics, goal_of, median, phase_summary, transport_metrics, Gate};
use super::run::RunReport;
use super::scenario::Layout;
use crate::error::Result;
use crate::policies::PolicyKind;

/// The gate configured for a crossing report.
pub fn report_gate(r: &RunReport) -> Option<Gate> {
    match &r.layout {
        Layout::Crossing(l) => Some(Gate {
            y: l.gate_y,
            deadlock_window: r.deadlock_window,
        }),
        _ => None,
    }
}

/// Kind-specific headline numbers. Quantities that do not apply to the run
/// (time to goal when the goal was never reached, say) are omitted.
pub fn scalar_metrics(r: &RunReport) -> Result<BTreeMap<String, f64>> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        m.insert(k.to_string(), v);
    };
    let robots = r.snapshots.first().map_or(0, |s| s.robots.len());
    put("robots", robots as f64);
    put("ticks", r.ticks as f64);
    put("sim_time", r.sim_time);
    put("decisions", r.decisions as f64);
    put("max_residual", r.contact.max_residual);
    put("residual_events", r.contact.residual_events as f64);

    if let Some(gate) = report_gate(r) {
        let c = crossing_metrics(r, &gate)?;
        put("flow_total", c.flow_total);
        put("flow_down", c.flow_down);
        put("flow_up", c.flow_up);
        put("gate_events", c.gate_events as f64);
        put("deadlock", if c.deadlock { 1.0 } else { 0.0 });
        put("longest_quiet", c.longest_quiet);
        put("min_completed", c.completed.iter().copied().min().unwrap_or(0) as f64);
        let done: Vec<f64> = c.completed.iter().map(|&k| k as f64).collect();
        if let Some(med) = median(&done) {
            put("median_completed", med);
        }
        put("alignment_failures", r.alignment_failures as f64);
    }
    if !r.pressure.is_empty() {
        let skip = (r.pressure.len() as f64 * r.warmup_fraction).floor() as usize;
        let tail = &r.pressure[skip.min(r.pressure.len() - 1)..];
        // time-weighted so a short final window counts for its length
        let span: f64 = tail.iter().map(|s| s.window.1 - s.window.0).sum();
        if span > 0.0 {
            let p = tail.iter().map(|s| s.pressure * (s.window.1 - s.window.0)).sum::<f64>() / span;
            let v = tail.iter().map(|s| s.volume * (s.window.1 - s.window.0)).sum::<f64>() / span;
            put("pressure", p);
            put("volume", v);
            put("pv", p * v);
        }
    }
    if let Some(goal) = goal_of(r) {
        let t = transport_metrics(r, &goal)?;
        put("max_displacement", t.max_displacement);
        if let Some(&(_, d)) = t.series.last() {
            put("final_displacement", d);
        }
        if let Some(tt) = t.time_to_goal {
            put("time_to_goal", tt);
        }
    }
    if r.kind == PolicyKind::TransportFree {
        if let Ok(p) = phase_summary(r) {
            put("mean_energy_gas", p.mean_energy_gas);
            put("mean_energy_liquid", p.mean_energy_liquid);
            put("liquid_density", p.liquid_density);
            put("gas_density", p.gas_density);
            put("density_ratio", p.density_ratio);
            put("gas_fraction", p.gas_fraction);
        }
    }
    m.retain(|_, v| v.is_finite());
    Ok(m)
}
