//! The tick loop: decide, substep, record.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::scenario::{substeps, CrossingLayout, Layout, Rect, Scenario};
use crate::error::{Error, Result};
use crate::policies::{decide, GoalDir, PolicyConfig, PolicyKind, Role};
use crate::rng::RngStream;
use crate::sensing::LightField;
use crate::units::{Angle, Vec2};
use crate::world::{ContactStats, Phase, PressureSample, World, ROBOT_RADIUS};

/// Samples every robot's next command on the decision cadence.
#[derive(Debug, Clone)]
pub struct Driver {
    cfg: PolicyConfig,
    roles: Vec<Role>,
    streams: Vec<RngStream>,
    next_tick: f64,
    pub decisions: u64,
    /// Decisions where a narrow-road robot could not align (in shadow);
    /// such a robot holds still for the tick.
    pub alignment_failures: u64,
}

impl Driver {
    pub fn new(cfg: &PolicyConfig, roles: &[Role], seed: u64) -> Driver {
        let root = RngStream::root(seed);
        Driver {
            cfg: cfg.clone(),
            roles: roles.to_vec(),
            streams: (0..roles.len()).map(|i| root.split(i as u64)).collect(),
            next_tick: f64::NEG_INFINITY,
            decisions: 0,
            alignment_failures: 0,
        }
    }

    /// One decision for every robot, in id order, against the current light.
    pub fn decide_all(&mut self, world: &mut World) -> Result<()> {
        let field = world.light();
        for (k, robot) in world.robots.iter_mut().enumerate() {
            match decide(robot, self.roles[k], &self.cfg, &field, &mut self.streams[k]) {
                Ok(cmd) => robot.apply(&cmd),
                Err(Error::AlignmentImpossible(_)) if self.cfg.kind == PolicyKind::NarrowRoad => {
                    robot.cmd_speed = 0.0;
                    self.alignment_failures += 1;
                }
                Err(e) => return Err(e),
            }
            self.decisions += 1;
        }
        self.next_tick = world.time + self.cfg.decision_tick;
        Ok(())
    }

    /// Decides if a tick has come due; suitable as a per-substep hook.
    pub fn drive(&mut self, world: &mut World) -> Result<()> {
        if world.time + 1e-9 >= self.next_tick {
            self.decide_all(world)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotSnap {
    pub id: usize,
    pub pos: Vec2,
    pub heading: Angle,
    pub speed: f64,
    pub phase: Phase,
}

/// World state right after a round of decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub payload: Option<Vec2>,
    pub robots: Vec<RobotSnap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitEvent {
    pub t: f64,
    pub id: usize,
    pub dir: GoalDir,
}

/// Per-tick road positions of the crossing robots.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossingLog {
    pub dirs: Vec<GoalDir>,
    /// Sample times; entry 0 is the start of the run.
    pub times: Vec<f64>,
    /// `y[id][k]` at `times[k]`.
    pub y: Vec<Vec<f32>>,
    /// `(k, id)`: robot `id` was teleported during `(times[k-1], times[k]]`.
    pub respawns: Vec<(usize, usize)>,
    pub exits: Vec<ExitEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub kind: PolicyKind,
    pub seed: u64,
    /// Digest of the scenario spec.
    pub digest: String,
    pub bounds: Rect,
    pub layout: Layout,
    /// Static light, without the payload shadow.
    pub light: LightField,
    pub payload_shadow: bool,
    pub payload_radius: Option<f64>,
    pub policy: PolicyConfig,
    pub snapshots: Vec<Snapshot>,
    /// Payload centre at the start and after every tick.
    pub payload: Vec<(f64, Vec2)>,
    pub crossing: Option<CrossingLog>,
    pub pressure: Vec<PressureSample>,
    pub decisions: u64,
    pub alignment_failures: u64,
    pub contact: ContactStats,
    pub ticks: u64,
    pub sim_time: f64,
    pub wall_time: f64,
    pub warmup_fraction: f64,
    pub deadlock_window: f64,
}

fn snapshot(world: &World) -> Snapshot {
    Snapshot {
        t: world.time,
        payload: world.payload.as_ref().map(|p| p.pos),
        robots: world
            .robots
            .iter()
            .map(|r| RobotSnap {
                id: r.id,
                pos: r.pos,
                heading: r.heading,
                speed: r.cmd_speed,
                phase: r.phase,
            })
            .collect(),
    }
}

/// First queue slot whose disk is clear of every robot.
fn free_slot(world: &World, queue: &[Vec2]) -> Option<Vec2> {
    let reach = 2.0 * ROBOT_RADIUS + 0.5;
    queue
        .iter()
        .copied()
        .find(|s| world.robots.iter().all(|r| (r.pos - *s).norm_sq() > reach * reach))
}

/// Teleports robots that reached the far chamber back to their entry
/// queue. Returns the ids moved.
fn respawn(world: &mut World, dirs: &[GoalDir], lay: &CrossingLayout) -> Vec<(usize, GoalDir)> {
    let mut moved = Vec::new();
    for k in 0..world.robots.len() {
        let y = world.robots[k].pos.y;
        let (done, queue) = match dirs[k] {
            GoalDir::Down => (y < lay.exit_down, &lay.queue_top),
            GoalDir::Up => (y > lay.exit_up, &lay.queue_bottom),
        };
        if !done {
            continue;
        }
        // a full queue leaves the robot waiting beyond the exit line
        if let Some(slot) = free_slot(world, queue) {
            world.robots[k].pos = slot;
            moved.push((k, dirs[k]));
        }
    }
    moved
}

pub fn run_scenario(s: &Scenario) -> Result<RunReport> {
    let started = Instant::now();
    let spec = &s.spec;
    let mut world = s.world.clone();
    let tick = spec.policy.decision_tick;
    let per_tick = substeps(tick, spec.dt)?;
    let ticks = ((spec.duration / tick) - 1e-9).ceil().max(1.0) as u64;
    let mut driver = Driver::new(&spec.policy, &s.roles, spec.seed);

    let crossing_layout = match &s.layout {
        Layout::Crossing(l) => Some(l),
        _ => None,
    };
    let mut crossing = crossing_layout.map(|_| {
        let dirs: Vec<GoalDir> = s
            .roles
            .iter()
            .map(|r| match r {
                Role::Road(g) => *g,
                Role::Free => GoalDir::Down,
            })
            .collect();
        CrossingLog {
            y: world.robots.iter().map(|r| vec![r.pos.y as f32]).collect(),
            times: vec![world.time],
            dirs,
            ..Default::default()
        }
    });

    let mut snapshots = Vec::new();
    let mut next_snapshot = world.time;
    let mut payload = Vec::new();
    if let Some(p) = &world.payload {
        payload.push((world.time, p.pos));
    }
    let mut pressure = Vec::new();
    let mut probe = world.pressure_probe().ok();

    for k in 0..ticks {
        driver.decide_all(&mut world)?;
        if world.time + 1e-9 >= next_snapshot {
            if let Some(pr) = &probe {
                if world.time > 0.0 {
                    pressure.push(world.pressure_since(pr)?);
                }
                probe = Some(world.pressure_probe()?);
            }
            snapshots.push(snapshot(&world));
            next_snapshot += spec.snapshot_period;
        }
        let mut respawned = Vec::new();
        for _ in 0..per_tick {
            world.step(spec.dt)?;
            if let (Some(lay), Some(log)) = (crossing_layout, crossing.as_mut()) {
                for (id, dir) in respawn(&mut world, &log.dirs, lay) {
                    log.exits.push(ExitEvent { t: world.time, id, dir });
                    respawned.push(id);
                }
            }
        }
        if let Some(log) = crossing.as_mut() {
            log.times.push(world.time);
            for (id, r) in world.robots.iter().enumerate() {
                log.y[id].push(r.pos.y as f32);
            }
            respawned.sort_unstable();
            respawned.dedup();
            log.respawns.extend(respawned.into_iter().map(|id| (k as usize + 1, id)));
        }
        if let Some(p) = &world.payload {
            payload.push((world.time, p.pos));
        }
    }
    if let Some(pr) = &probe {
        if world.time > pr.start() + 1e-9 {
            pressure.push(world.pressure_since(pr)?);
        }
    }

    Ok(RunReport {
        name: spec.name.clone(),
        kind: spec.policy.kind,
        seed: spec.seed,
        digest: s.digest.clone(),
        bounds: s.bounds,
        layout: s.layout.clone(),
        light: world.light.clone(),
        payload_shadow: world.payload_casts_shadow,
        payload_radius: world.payload.as_ref().map(|p| p.radius),
        policy: spec.policy.clone(),
        snapshots,
        payload,
        crossing,
        pressure,
        decisions: driver.decisions,
        alignment_failures: driver.alignment_failures,
        contact: world.stats,
        ticks,
        sim_time: world.time,
        wall_time: started.elapsed().as_secs_f64(),
        warmup_fraction: spec.metrics.warmup_fraction,
        deadlock_window: spec.metrics.deadlock_window,
    })
}
