//! Quantities extracted from run reports, and the piston sweeps.

use serde::{Deserialize, Serialize};

use super::run::{Driver, RunReport};
use super::scenario::{ArenaSpec, Layout, Scenario};
use crate::error::{Error, Result};
use crate::policies::{phase_for_light, GoalDir, PolicyKind};
use crate::sensing::{light_intensity, Disk, LightField};
use crate::units::{kinetic_energy, EnergyTemp, Vec2};
use crate::world::{equilibrium_volume, Phase, SettleCriteria};

/// Horizontal gate line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub y: f64,
    /// Longest crossing-free stretch tolerated, s.
    pub deadlock_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingMetrics {
    /// Net gate crossings per second in each group's travel direction.
    pub flow_down: f64,
    pub flow_up: f64,
    pub flow_total: f64,
    /// Gate crossings in either sense, all robots.
    pub gate_events: usize,
    /// Completed end-to-end transits per robot.
    pub completed: Vec<usize>,
    pub deadlock: bool,
    /// Longest stretch without a gate crossing, s.
    pub longest_quiet: f64,
}

/// Counts signed gate crossings from the per-tick tracks. Tick intervals in
/// which a robot was teleported are skipped. A run counts as deadlocked
/// when some stretch longer than the gate's window passes without any
/// crossing; a run shorter than the window, or one without robots, is
/// never deadlocked.
pub fn crossing_metrics(r: &RunReport, gate: &Gate) -> Result<CrossingMetrics> {
    let log = r
        .crossing
        .as_ref()
        .ok_or(Error::WrongReportKind { expected: "crossing" })?;
    if !(gate.y > r.bounds.y0 && gate.y < r.bounds.y1) {
        return Err(Error::invalid(
            "gate",
            format!("y = {} outside the arena ({}, {})", gate.y, r.bounds.y0, r.bounds.y1),
        ));
    }
    if !(gate.deadlock_window > 0.0) {
        return Err(Error::invalid("gate.deadlock_window", "must be > 0"));
    }
    let g = gate.y as f32;
    let mut skip = vec![Vec::new(); log.y.len()];
    for &(k, id) in &log.respawns {
        skip[id].push(k);
    }
    let mut events = Vec::new();
    let (mut net_down, mut net_up) = (0i64, 0i64);
    for (id, ys) in log.y.iter().enumerate() {
        let mut skips = skip[id].iter().peekable();
        for k in 1..ys.len() {
            while skips.peek().is_some_and(|s| **s < k) {
                skips.next();
            }
            if skips.peek() == Some(&&k) {
                continue;
            }
            let (a, b) = (ys[k - 1], ys[k]);
            // downward: from >= g to < g
            let sense = if a >= g && b < g {
                -1
            } else if a < g && b >= g {
                1
            } else {
                0
            };
            if sense == 0 {
                continue;
            }
            events.push(log.times[k]);
            match log.dirs[id] {
                GoalDir::Down => net_down -= sense,
                GoalDir::Up => net_up += sense,
            }
        }
    }
    events.sort_by(f64::total_cmp);
    let t0 = log.times.first().copied().unwrap_or(0.0);
    let t1 = log.times.last().copied().unwrap_or(t0);
    let span = t1 - t0;
    let mut longest: f64 = 0.0;
    let mut last = t0;
    for &t in &events {
        longest = longest.max(t - last);
        last = t;
    }
    longest = longest.max(t1 - last);
    let mut completed = vec![0usize; log.y.len()];
    for e in &log.exits {
        completed[e.id] += 1;
    }
    let rate = |n: i64| if span > 0.0 { n as f64 / span } else { 0.0 };
    Ok(CrossingMetrics {
        flow_down: rate(net_down),
        flow_up: rate(net_up),
        flow_total: rate(net_down + net_up),
        gate_events: events.len(),
        completed,
        deadlock: !log.y.is_empty() && span > gate.deadlock_window && longest > gate.deadlock_window,
        longest_quiet: longest,
    })
}

/// Band of positions along the up-light axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportMetrics {
    pub max_displacement: f64,
    pub time_to_goal: Option<f64>,
    /// `(t, displacement)` per tick.
    pub series: Vec<(f64, f64)>,
}

pub fn goal_of(r: &RunReport) -> Option<GoalRegion> {
    match r.layout {
        Layout::Transport {
            goal_center,
            goal_half_width,
        } => Some(GoalRegion {
            center: goal_center,
            half_width: goal_half_width,
        }),
        _ => None,
    }
}

/// Goal-ward displacement measured along the up-light axis.
pub fn transport_metrics(r: &RunReport, goal: &GoalRegion) -> Result<TransportMetrics> {
    let (_, p0) = *r.payload.first().ok_or(Error::NoPayload)?;
    let u = Vec2::from_angle(r.light.up_light());
    let mut max_d: f64 = 0.0;
    let mut hit = None;
    let series: Vec<(f64, f64)> = r
        .payload
        .iter()
        .map(|&(t, p)| {
            let d = (p - p0).dot(u);
            max_d = max_d.max(d);
            if hit.is_none() && (p.dot(u) - goal.center).abs() <= goal.half_width {
                hit = Some(t);
            }
            (t, d)
        })
        .collect();
    Ok(TransportMetrics {
        max_displacement: max_d,
        time_to_goal: hit,
        series,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub t: f64,
    pub gas: usize,
    pub liquid: usize,
    pub mean_energy_gas: Option<f64>,
    pub mean_energy_liquid: Option<f64>,
    /// Robots per mm² of shadowed and lit arena.
    pub liquid_density: Option<f64>,
    pub gas_density: Option<f64>,
}

/// Grid resolution for shadow areas, mm.
const AREA_CELL: f64 = 5.0;

fn field_at(r: &RunReport, payload: Option<Vec2>) -> LightField {
    let mut f = r.light.clone();
    if r.payload_shadow {
        if let (Some(c), Some(rad)) = (payload, r.payload_radius) {
            f.occluders.push(Disk { center: c, radius: rad });
        }
    }
    f
}

/// Shadowed and lit free area of the arena, excluding the payload.
fn region_areas(r: &RunReport, field: &LightField, payload: Option<Vec2>, l_thread: f64) -> (f64, f64) {
    let b = r.bounds;
    let nx = (b.width() / AREA_CELL).ceil() as usize;
    let ny = (b.height() / AREA_CELL).ceil() as usize;
    let (cw, ch) = (b.width() / nx as f64, b.height() / ny as f64);
    let rad = r.payload_radius.unwrap_or(0.0);
    let (mut dark, mut lit) = (0usize, 0usize);
    for j in 0..ny {
        for i in 0..nx {
            let p = Vec2::new(b.x0 + (i as f64 + 0.5) * cw, b.y0 + (j as f64 + 0.5) * ch);
            if payload.is_some_and(|c| (p - c).norm_sq() < rad * rad) {
                continue;
            }
            if light_intensity(p, field) > l_thread {
                lit += 1;
            } else {
                dark += 1;
            }
        }
    }
    (dark as f64 * cw * ch, lit as f64 * cw * ch)
}

/// Per-snapshot phase counts, mean energies and region densities.
pub fn phase_census(r: &RunReport) -> Result<Vec<CensusRow>> {
    if r.kind != PolicyKind::TransportFree {
        return Err(Error::WrongReportKind {
            expected: "transport_free",
        });
    }
    let l_thread = r.policy.l_thread.unwrap_or(0.5);
    let mut rows = Vec::with_capacity(r.snapshots.len());
    for s in &r.snapshots {
        let (mut ng, mut nl, mut eg, mut el) = (0usize, 0usize, 0.0, 0.0);
        for rb in &s.robots {
            match rb.phase {
                Phase::Gas => {
                    ng += 1;
                    eg += kinetic_energy(rb.speed);
                }
                Phase::Liquid => {
                    nl += 1;
                    el += kinetic_energy(rb.speed);
                }
                Phase::Unlabeled => {}
            }
        }
        let field = field_at(r, s.payload);
        let (dark, lit) = region_areas(r, &field, s.payload, l_thread);
        let mean = |e: f64, n: usize| (n > 0).then(|| e / n as f64);
        let dens = |n: usize, a: f64| (a > 0.0).then(|| n as f64 / a);
        rows.push(CensusRow {
            t: s.t,
            gas: ng,
            liquid: nl,
            mean_energy_gas: mean(eg, ng),
            mean_energy_liquid: mean(el, nl),
            liquid_density: dens(nl, dark),
            gas_density: dens(ng, lit),
        });
    }
    Ok(rows)
}

/// Steady-state phase summary over snapshots past the warm-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub mean_energy_gas: f64,
    pub mean_energy_liquid: f64,
    pub liquid_density: f64,
    pub gas_density: f64,
    pub density_ratio: f64,
    pub gas_fraction: f64,
}

pub fn phase_summary(r: &RunReport) -> Result<PhaseSummary> {
    let rows = phase_census(r)?;
    let skip = (rows.len() as f64 * r.warmup_fraction).floor() as usize;
    let tail = &rows[skip.min(rows.len())..];
    if tail.is_empty() {
        return Err(Error::EmptySample);
    }
    // energies pooled per robot-decision, densities averaged per snapshot
    let (mut eg, mut ng, mut el, mut nl) = (0.0, 0usize, 0.0, 0usize);
    let (mut dl, mut dg, mut nd) = (0.0, 0.0, 0usize);
    for row in tail {
        if let Some(m) = row.mean_energy_gas {
            eg += m * row.gas as f64;
            ng += row.gas;
        }
        if let Some(m) = row.mean_energy_liquid {
            el += m * row.liquid as f64;
            nl += row.liquid;
        }
        if let (Some(a), Some(b)) = (row.liquid_density, row.gas_density) {
            dl += a;
            dg += b;
            nd += 1;
        }
    }
    let div = |a: f64, n: usize| if n > 0 { a / n as f64 } else { f64::NAN };
    let (liq, gas) = (div(dl, nd), div(dg, nd));
    Ok(PhaseSummary {
        mean_energy_gas: div(eg, ng),
        mean_energy_liquid: div(el, nl),
        liquid_density: liq,
        gas_density: gas,
        density_ratio: liq / gas,
        gas_fraction: div(ng as f64, ng + nl),
    })
}

/// Snapshot robots whose recorded phase differs from the label implied by
/// their position in the light at that instant.
pub fn relabel_mismatches(r: &RunReport) -> Result<usize> {
    if r.kind != PolicyKind::TransportFree {
        return Err(Error::WrongReportKind {
            expected: "transport_free",
        });
    }
    let l_thread = r.policy.l_thread.unwrap_or(0.5);
    let mut bad = 0;
    for s in &r.snapshots {
        let field = field_at(r, s.payload);
        bad += s
            .robots
            .iter()
            .filter(|rb| phase_for_light(light_intensity(rb.pos, &field), l_thread) != rb.phase)
            .count();
    }
    Ok(bad)
}

/// Per-robot position series from the snapshots, in snapshot order.
pub fn robot_tracks(r: &RunReport) -> Vec<Vec<Vec2>> {
    let n = r.snapshots.iter().map(|s| s.robots.len()).max().unwrap_or(0);
    let mut out = vec![Vec::with_capacity(r.snapshots.len()); n];
    for s in &r.snapshots {
        for rb in &s.robots {
            out[rb.id].push(rb.pos);
        }
    }
    out
}

/// One settled point of a piston sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvPoint {
    pub force: f64,
    pub volume: f64,
    pub pressure: f64,
    pub settle_time: f64,
}

fn compression_base(base: &Scenario) -> Result<()> {
    match (&base.spec.arena, base.spec.policy.kind) {
        (ArenaSpec::Compression(_), PolicyKind::Compression) => Ok(()),
        _ => Err(Error::WrongReportKind {
            expected: "compression",
        }),
    }
}

/// Settles the base box under each force in turn, from the base layout
/// each time. A settle failure is returned in place for that force.
pub fn pv_sweep(
    base: &Scenario,
    forces: &[f64],
    kt: EnergyTemp,
    settle: &SettleCriteria,
) -> Result<Vec<Result<PvPoint>>> {
    compression_base(base)?;
    if forces.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(Error::invalid("forces", "every force must be > 0"));
    }
    let mut policy = base.spec.policy.clone();
    policy.kt = Some(kt);
    policy.validate()?;
    let arena = match &base.spec.arena {
        ArenaSpec::Compression(a) => *a,
        _ => unreachable!(),
    };
    let settle = SettleCriteria {
        dt: base.spec.dt,
        ..*settle
    };
    Ok(forces
        .iter()
        .map(|&f| {
            let mut world = base.world.clone();
            for p in world.pistons.iter_mut() {
                p.locked = false;
                if arena.piston_damping.is_none() {
                    p.damping = crate::world::PistonWall::critical_damping(p.mass, f, arena.height);
                }
            }
            let mut driver = Driver::new(&policy, &base.roles, base.spec.seed);
            let t0 = world.time;
            let (volume, pressure) = equilibrium_volume(&mut world, f, &settle, &mut |w| driver.drive(w))?;
            Ok(PvPoint {
                force: f,
                volume,
                pressure,
                settle_time: world.time - t0,
            })
        })
        .collect())
}

/// Pressure on locked pistons at each temperature, averaged after
/// `warmup` seconds for `measure` seconds.
pub fn locked_pressure_sweep(base: &Scenario, kts: &[EnergyTemp], warmup: f64, measure: f64) -> Result<Vec<(f64, f64)>> {
    compression_base(base)?;
    if !(warmup >= 0.0 && measure > 0.0) {
        return Err(Error::invalid("measure", "warm-up >= 0 and measure > 0 required"));
    }
    let dt = base.spec.dt;
    kts.iter()
        .map(|&kt| {
            let mut policy = base.spec.policy.clone();
            policy.kt = Some(kt);
            policy.validate()?;
            let mut world = base.world.clone();
            for p in world.pistons.iter_mut() {
                p.locked = true;
            }
            let mut driver = Driver::new(&policy, &base.roles, base.spec.seed);
            let run = |world: &mut crate::world::World, driver: &mut Driver, secs: f64| -> Result<()> {
                for _ in 0..(secs / dt).round() as usize {
                    driver.drive(world)?;
                    world.step(dt)?;
                }
                Ok(())
            };
            run(&mut world, &mut driver, warmup)?;
            let probe = world.pressure_probe()?;
            run(&mut world, &mut driver, measure)?;
            Ok((kt.kt(), world.pressure_since(&probe)?.pressure))
        })
        .collect()
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, R²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n.min(ys.len()) });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("xs", "all equal"));
    }
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((my - b * mx, b, r2))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = 0.5 * (i + j) as f64 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (_, b, r2) = linear_fit(&ranks(xs), &ranks(ys))?;
    Ok(r2.sqrt().copysign(b))
}

/// Median of a non-empty sample.
pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[m] } else { 0.5 * (s[m - 1] + s[m]) })
}
