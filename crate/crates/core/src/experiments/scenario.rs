//! Declarative scenario files and the worlds they build.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::policies::{GoalDir, PolicyConfig, PolicyKind, Role};
use crate::rng::RngStream;
use crate::sensing::LightField;
use crate::units::{wrap_angle, Angle, Vec2};
use crate::world::{
    polygon, ContactParams, PayloadObject, PistonSide, PistonWall, RobotState, World, DEFAULT_DT, PAYLOAD_RADIUS,
    ROBOT_RADIUS,
};

/// Body-to-space ratio of the ant road, kept for the scaled crossing.
pub const OCCUPATION_RATIO: f64 = 0.17857;

/// Stream id of the placement jitter; robot decision streams use `0..N`.
const PLACEMENT_STREAM: u64 = 1 << 40;

/// Clearance added to every placement so seeded bodies start apart, mm.
const PLACEMENT_GAP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Simulated seconds.
    pub duration: f64,
    #[serde(default = "one")]
    pub snapshot_period: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub arena: ArenaSpec,
    #[serde(default)]
    pub robots: RobotsSpec,
    pub policy: PolicyConfig,
    #[serde(default)]
    pub light: LightSpec,
    #[serde(default)]
    pub contact: ContactParams,
    #[serde(default)]
    pub metrics: MetricsSpec,
}

fn one() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArenaSpec {
    Crossing(CrossingArena),
    Compression(CompressionArena),
    Transport(TransportArena),
}

impl ArenaSpec {
    pub fn as_str(&self) -> &'static str {
        match self {
            ArenaSpec::Crossing(_) => "crossing",
            ArenaSpec::Compression(_) => "compression",
            ArenaSpec::Transport(_) => "transport",
        }
    }
}

/// Two wide chambers joined by a narrow road along `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossingArena {
    pub narrow_width: f64,
    pub narrow_length: f64,
    pub wide_width: f64,
    pub wide_length: f64,
}

impl Default for CrossingArena {
    fn default() -> Self {
        // the 20 mm x 100 mm ant road scaled by 381 / 100
        CrossingArena {
            narrow_width: 76.0,
            narrow_length: 381.0,
            wide_width: 152.0,
            wide_length: 285.0,
        }
    }
}

impl CrossingArena {
    pub fn area(&self) -> f64 {
        2.0 * self.wide_width * self.wide_length + self.narrow_width * self.narrow_length
    }

    pub fn height(&self) -> f64 {
        2.0 * self.wide_length + self.narrow_length
    }
}

/// Box `[0, width] × [0, height]` closed above and below by pistons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompressionArena {
    pub width: f64,
    pub height: f64,
    /// Inward load on each piston.
    #[serde(default)]
    pub force: f64,
    #[serde(default)]
    pub locked: bool,
    #[serde(default = "piston_mass")]
    pub piston_mass: f64,
    /// Defaults to critical damping at the initial gap.
    #[serde(default)]
    pub piston_damping: Option<f64>,
    /// How far each piston may retreat beyond its start, in box heights.
    #[serde(default = "expansion")]
    pub expansion: f64,
}

fn piston_mass() -> f64 {
    50.0
}
fn expansion() -> f64 {
    3.0
}

/// Rectangular box with the payload; the goal band lies at the lit wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportArena {
    pub width: f64,
    pub height: f64,
    #[serde(default = "payload_mass")]
    pub payload_mass: f64,
    #[serde(default = "payload_damping")]
    pub payload_damping: f64,
    /// Defaults to the box centre.
    #[serde(default)]
    pub payload_start: Option<[f64; 2]>,
    /// Distance of the goal band centre from the lit wall; default one
    /// payload diameter.
    #[serde(default)]
    pub goal_offset: Option<f64>,
    /// Half-width of the goal band; default one payload radius.
    #[serde(default)]
    pub goal_half_width: Option<f64>,
}

fn payload_mass() -> f64 {
    10.0
}
fn payload_damping() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotsSpec {
    /// Explicit robot count; crossing arenas derive it from the
    /// occupation ratio when absent.
    pub count: Option<usize>,
    pub occupation_ratio: Option<f64>,
    /// Share of crossing robots heading down (towards the light).
    pub down_fraction: f64,
    /// Largest placement offset from the seeding lattice, mm.
    pub jitter: f64,
}

impl Default for RobotsSpec {
    fn default() -> Self {
        RobotsSpec {
            count: None,
            occupation_ratio: None,
            down_fraction: 0.5,
            jitter: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LightSpec {
    /// Propagation direction, degrees. Crossing defaults to 90 (source
    /// below the road), transport to -90 (source above the box).
    pub direction: Option<f64>,
    pub intensity: f64,
    /// Whether the payload blocks the light.
    pub payload_shadow: bool,
}

impl Default for LightSpec {
    fn default() -> Self {
        LightSpec {
            direction: None,
            intensity: 1.0,
            payload_shadow: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSpec {
    /// Gate line `y` for crossing metrics; default mid-road.
    pub gate_y: Option<f64>,
    /// Longest crossing-free stretch before a run counts as deadlocked, s.
    pub deadlock_window: f64,
    /// Fraction of the run discarded before steady-state averages.
    pub warmup_fraction: f64,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        MetricsSpec {
            gate_y: None,
            deadlock_window: 2000.0,
            warmup_fraction: 0.5,
        }
    }
}

/// Axis-aligned bounds of an arena.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Respawn geometry of the crossing road.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingLayout {
    pub arena: CrossingArena,
    /// Down-movers finish once below this `y`.
    pub exit_down: f64,
    /// Up-movers finish once above this `y`.
    pub exit_up: f64,
    /// Entry queue slots, back wall first: top chamber for down-movers.
    pub queue_top: Vec<Vec2>,
    pub queue_bottom: Vec<Vec2>,
    pub gate_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layout {
    Crossing(CrossingLayout),
    Compression,
    Transport {
        /// Centre of the goal band along the up-light axis.
        goal_center: f64,
        goal_half_width: f64,
    },
}

/// A ready-to-run experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub world: World,
    pub roles: Vec<Role>,
    pub layout: Layout,
    pub bounds: Rect,
    /// Hex SHA-256 of the canonical spec.
    pub digest: String,
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<ScenarioSpec> {
        toml::from_str(text).map_err(|e| toml_error(&e))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("scenario", e.to_string()))
    }

    /// SHA-256 over the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario spec serializes");
        hex(&Sha256::digest(&json))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::config("duration", "must be > 0"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config("dt", "must be > 0"));
        }
        if !(self.snapshot_period > 0.0) || !self.snapshot_period.is_finite() {
            return Err(Error::config("snapshot_period", "must be > 0"));
        }
        self.policy.validate()?;
        substeps(self.policy.decision_tick, self.dt)?;
        let r = &self.robots;
        if !(0.0..=1.0).contains(&r.down_fraction) {
            return Err(Error::config("robots.down_fraction", "must lie in [0, 1]"));
        }
        if !(r.jitter >= 0.0) || !r.jitter.is_finite() {
            return Err(Error::config("robots.jitter", "must be >= 0"));
        }
        if let Some(o) = r.occupation_ratio {
            if !(o > 0.0 && o < 1.0) {
                return Err(Error::config("robots.occupation_ratio", "must lie in (0, 1)"));
            }
        }
        if !(0.0..=1.0).contains(&self.light.intensity) {
            return Err(Error::config("light.intensity", "must lie in [0, 1]"));
        }
        if let Some(d) = self.light.direction {
            if !d.is_finite() {
                return Err(Error::config("light.direction", "must be finite"));
            }
        }
        let m = &self.metrics;
        if !(m.deadlock_window > 0.0) {
            return Err(Error::config("metrics.deadlock_window", "must be > 0"));
        }
        if !(0.0..1.0).contains(&m.warmup_fraction) {
            return Err(Error::config("metrics.warmup_fraction", "must lie in [0, 1)"));
        }
        let kind = self.policy.kind;
        let ok = matches!(
            (&self.arena, kind),
            (ArenaSpec::Crossing(_), PolicyKind::NarrowRoad)
                | (ArenaSpec::Compression(_), PolicyKind::Compression)
                | (ArenaSpec::Transport(_), PolicyKind::TransportConnected | PolicyKind::TransportFree)
        );
        if !ok {
            return Err(Error::config(
                "arena.kind",
                format!("{} arena does not fit policy {}", self.arena.as_str(), kind.as_str()),
            ));
        }
        match &self.arena {
            ArenaSpec::Crossing(a) => {
                let dims = [a.narrow_width, a.narrow_length, a.wide_width, a.wide_length];
                if dims.iter().any(|d| !(*d > 0.0)) {
                    return Err(Error::config("arena", "crossing dimensions must be > 0"));
                }
                if a.narrow_width > a.wide_width {
                    return Err(Error::config("arena.narrow_width", "exceeds wide_width"));
                }
                if a.narrow_width < 2.0 * ROBOT_RADIUS {
                    return Err(Error::config("arena.narrow_width", "narrower than a robot"));
                }
            }
            ArenaSpec::Compression(a) => {
                if !(a.width > 0.0 && a.height > 2.0 * ROBOT_RADIUS) {
                    return Err(Error::config("arena", "box must be wider than 0 and taller than a robot"));
                }
                if !(a.force >= 0.0) || !a.force.is_finite() {
                    return Err(Error::config("arena.force", "must be >= 0"));
                }
                if !(a.piston_mass > 0.0) {
                    return Err(Error::config("arena.piston_mass", "must be > 0"));
                }
                if let Some(c) = a.piston_damping {
                    if !(c >= 0.0) {
                        return Err(Error::config("arena.piston_damping", "must be >= 0"));
                    }
                }
                if !(a.expansion >= 0.0) {
                    return Err(Error::config("arena.expansion", "must be >= 0"));
                }
            }
            ArenaSpec::Transport(a) => {
                if !(a.width > 2.0 * PAYLOAD_RADIUS && a.height > 2.0 * PAYLOAD_RADIUS) {
                    return Err(Error::config("arena", "box must fit the payload"));
                }
                if !(a.payload_mass > 0.0) {
                    return Err(Error::config("arena.payload_mass", "must be > 0"));
                }
                if !(a.payload_damping >= 0.0) {
                    return Err(Error::config("arena.payload_damping", "must be >= 0"));
                }
                if let Some(h) = a.goal_half_width {
                    if !(h > 0.0) {
                        return Err(Error::config("arena.goal_half_width", "must be > 0"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Robot count after applying the occupation rule.
    pub fn robot_count(&self) -> usize {
        if let Some(n) = self.robots.count {
            return n;
        }
        match &self.arena {
            ArenaSpec::Crossing(a) => {
                let ratio = self.robots.occupation_ratio.unwrap_or(OCCUPATION_RATIO);
                count_for_ratio(ratio, a.area())
            }
            _ => 0,
        }
    }
}

/// `floor(ratio · area / robot footprint)`.
pub fn count_for_ratio(ratio: f64, area: f64) -> usize {
    let body = std::f64::consts::PI * ROBOT_RADIUS * ROBOT_RADIUS;
    (ratio * area / body + 1e-9).floor() as usize
}

/// Physics substeps per decision tick.
pub(crate) fn substeps(tick: f64, dt: f64) -> Result<usize> {
    let k = (tick / dt).round();
    if k < 1.0 || ((k * dt - tick).abs() > 1e-9 * tick.max(1.0)) {
        return Err(Error::config("dt", format!("must divide policy.decision_tick = {tick}")));
    }
    Ok(k as usize)
}

pub(crate) fn toml_error(e: &toml::de::Error) -> Error {
    let msg = e.message().to_string();
    // serde names the offending key in backticks; keep it as the key
    let key = msg
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "scenario".to_string());
    let line = e.span().map(|s| s.start);
    Error::config(key, match line {
        Some(off) => format!("{msg} (byte {off})"),
        None => msg,
    })
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let n = spec.robot_count();
    let mut jitter_rng = RngStream::new(spec.seed, PLACEMENT_STREAM);
    let (mut world, roles, layout, bounds) = match &spec.arena {
        ArenaSpec::Crossing(a) => build_crossing(spec, a, n, &mut jitter_rng)?,
        ArenaSpec::Compression(a) => build_compression(spec, a, n, &mut jitter_rng)?,
        ArenaSpec::Transport(a) => build_transport(spec, a, n, &mut jitter_rng)?,
    };
    world.contact = spec.contact;
    world.validate()?;
    Ok(Scenario {
        spec: spec.clone(),
        world,
        roles,
        layout,
        bounds,
        digest: spec.digest(),
    })
}

fn light_field(spec: &ScenarioSpec, default_deg: f64) -> Result<LightField> {
    let dir = Angle::from_degrees(spec.light.direction.unwrap_or(default_deg))?;
    LightField::new(dir, spec.light.intensity)
}

/// Lattice slots inside `[x0, x1] × [y0, y1]`, filled row by row starting
/// from `y0` (or `y1` when `from_top`).
fn queue_slots(x0: f64, x1: f64, y0: f64, y1: f64, pitch: f64, from_top: bool) -> Vec<Vec2> {
    let r = ROBOT_RADIUS + PLACEMENT_GAP;
    let cols = ((x1 - x0 - 2.0 * r) / pitch).floor() as i64 + 1;
    let rows = ((y1 - y0 - 2.0 * r) / pitch).floor() as i64 + 1;
    if cols < 1 || rows < 1 {
        return Vec::new();
    }
    // centre the columns in the chamber
    let span = (cols - 1) as f64 * pitch;
    let xs = 0.5 * (x0 + x1) - 0.5 * span;
    let mut out = Vec::new();
    for row in 0..rows {
        let y = if from_top {
            y1 - r - row as f64 * pitch
        } else {
            y0 + r + row as f64 * pitch
        };
        for c in 0..cols {
            out.push(Vec2::new(xs + c as f64 * pitch, y));
        }
    }
    out
}

fn jittered(p: Vec2, amp: f64, rng: &mut RngStream) -> Vec2 {
    if amp == 0.0 {
        return p;
    }
    let dx = (2.0 * rng.uniform() - 1.0) * amp;
    let dy = (2.0 * rng.uniform() - 1.0) * amp;
    Vec2::new(p.x + dx, p.y + dy)
}

type Built = (World, Vec<Role>, Layout, Rect);

fn build_crossing(spec: &ScenarioSpec, a: &CrossingArena, n: usize, rng: &mut RngStream) -> Result<Built> {
    let (ww, wl, nw, nl) = (a.wide_width, a.wide_length, a.narrow_width, a.narrow_length);
    let h = a.height();
    let cx = 0.5 * ww;
    let (l, r) = (cx - 0.5 * nw, cx + 0.5 * nw);
    let (y_lo, y_hi) = (wl, wl + nl);
    let walls = polygon(&[
        Vec2::new(0.0, 0.0),
        Vec2::new(ww, 0.0),
        Vec2::new(ww, y_lo),
        Vec2::new(r, y_lo),
        Vec2::new(r, y_hi),
        Vec2::new(ww, y_hi),
        Vec2::new(ww, h),
        Vec2::new(0.0, h),
        Vec2::new(0.0, y_hi),
        Vec2::new(l, y_hi),
        Vec2::new(l, y_lo),
        Vec2::new(0.0, y_lo),
    ]);
    let jitter = spec.robots.jitter;
    let pitch = 2.0 * (ROBOT_RADIUS + PLACEMENT_GAP + jitter);
    let queue_top = queue_slots(0.0, ww, y_hi, h, pitch, true);
    let queue_bottom = queue_slots(0.0, ww, 0.0, y_lo, pitch, false);
    let n_down = (spec.robots.down_fraction * n as f64).round() as usize;
    let n_up = n - n_down;
    if n_down > queue_top.len() || n_up > queue_bottom.len() {
        return Err(Error::InfeasiblePacking { count: n });
    }
    let mut world = World::new(walls);
    world.light = light_field(spec, 90.0)?;
    let mut roles = Vec::with_capacity(n);
    // ids alternate between directions so neither group owns the low ids
    let (mut kd, mut ku) = (0, 0);
    for id in 0..n {
        let down = if kd == n_down {
            false
        } else if ku == n_up {
            true
        } else {
            (id * n_down) / n >= kd
        };
        let (slot, goal) = if down {
            kd += 1;
            (queue_top[kd - 1], GoalDir::Down)
        } else {
            ku += 1;
            (queue_bottom[ku - 1], GoalDir::Up)
        };
        let p = jittered(slot, jitter, rng);
        world.robots.push(RobotState::new(id, p, Angle::ZERO));
        roles.push(Role::Road(goal));
    }
    let gate_y = spec.metrics.gate_y.unwrap_or(0.5 * h);
    if !(gate_y > 0.0 && gate_y < h) {
        return Err(Error::config("metrics.gate_y", format!("{gate_y} outside the arena (0, {h})")));
    }
    let layout = CrossingLayout {
        arena: *a,
        exit_down: 0.5 * wl,
        exit_up: h - 0.5 * wl,
        queue_top,
        queue_bottom,
        gate_y,
    };
    let bounds = Rect {
        x0: 0.0,
        y0: 0.0,
        x1: ww,
        y1: h,
    };
    Ok((world, roles, Layout::Crossing(layout), bounds))
}

/// `n` well-spread lattice points in the rectangle, skipping any rejected
/// by `keep`. Jitter is limited so jittered neighbours never touch.
fn spread_lattice(
    rect: Rect,
    n: usize,
    jitter: f64,
    keep: &dyn Fn(Vec2) -> bool,
    rng: &mut RngStream,
) -> Result<Vec<Vec2>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let r = ROBOT_RADIUS + PLACEMENT_GAP;
    let (w, h) = (rect.width() - 2.0 * r, rect.height() - 2.0 * r);
    if !(w >= 0.0 && h >= 0.0) {
        return Err(Error::InfeasiblePacking { count: n });
    }
    // grow the lattice until enough admissible points exist
    let mut spacing = ((w + 2.0 * r) * (h + 2.0 * r) / n as f64).sqrt();
    loop {
        if spacing < 2.0 * r {
            return Err(Error::InfeasiblePacking { count: n });
        }
        let cols = (w / spacing).floor() as usize + 1;
        let rows = (h / spacing).floor() as usize + 1;
        let sx = if cols > 1 { w / (cols - 1) as f64 } else { 0.0 };
        let sy = if rows > 1 { h / (rows - 1) as f64 } else { 0.0 };
        let pitch = if cols > 1 && rows > 1 { sx.min(sy) } else { sx.max(sy) };
        if cols * rows > 1 && pitch < 2.0 * r {
            spacing *= 0.97;
            continue;
        }
        let pts: Vec<Vec2> = (0..rows)
            .flat_map(|j| (0..cols).map(move |i| (i, j)))
            .map(|(i, j)| {
                let x = if cols > 1 { rect.x0 + r + sx * i as f64 } else { 0.5 * (rect.x0 + rect.x1) };
                let y = if rows > 1 { rect.y0 + r + sy * j as f64 } else { 0.5 * (rect.y0 + rect.y1) };
                Vec2::new(x, y)
            })
            .filter(|p| keep(*p))
            .collect();
        if pts.len() >= n {
            let amp = if cols * rows > 1 {
                jitter.min(0.5 * (pitch - 2.0 * r)).max(0.0)
            } else {
                0.0
            };
            let m = pts.len();
            return Ok((0..n)
                .map(|k| {
                    let p = pts[(k * m) / n];
                    let q = jittered(p, amp, rng);
                    // stay inside the box and admissible after jitter
                    if rect.contains(q) && keep(q) {
                        q
                    } else {
                        p
                    }
                })
                .collect());
        }
        spacing *= 0.97;
    }
}

fn build_compression(spec: &ScenarioSpec, a: &CompressionArena, n: usize, rng: &mut RngStream) -> Result<Built> {
    let (w, h) = (a.width, a.height);
    let reach = a.expansion * h;
    let walls = polygon(&[
        Vec2::new(0.0, -reach - h),
        Vec2::new(w, -reach - h),
        Vec2::new(w, h + reach + h),
        Vec2::new(0.0, h + reach + h),
    ]);
    let damping = a
        .piston_damping
        .unwrap_or_else(|| PistonWall::critical_damping(a.piston_mass, a.force, h));
    let piston = |side, y, travel| PistonWall {
        side,
        position: y,
        x_min: 0.0,
        width: w,
        mass: a.piston_mass,
        external_force: a.force,
        velocity: 0.0,
        damping,
        travel,
        locked: a.locked,
        impulse_total: 0.0,
    };
    let pistons = vec![
        piston(PistonSide::Bottom, 0.0, (-reach, h)),
        piston(PistonSide::Top, h, (0.0, h + reach)),
    ];
    let mut world = World::new(walls).with_pistons(pistons);
    world.light = light_field(spec, 90.0)?;
    let rect = Rect {
        x0: 0.0,
        y0: 0.0,
        x1: w,
        y1: h,
    };
    for (id, p) in spread_lattice(rect, n, spec.robots.jitter, &|_| true, rng)?.into_iter().enumerate() {
        world.robots.push(RobotState::new(id, p, Angle::ZERO));
    }
    let bounds = Rect {
        x0: 0.0,
        y0: -reach,
        x1: w,
        y1: h + reach,
    };
    Ok((world, vec![Role::Free; n], Layout::Compression, bounds))
}

fn build_transport(spec: &ScenarioSpec, a: &TransportArena, n: usize, rng: &mut RngStream) -> Result<Built> {
    let (w, h) = (a.width, a.height);
    let walls = polygon(&[Vec2::new(0.0, 0.0), Vec2::new(w, 0.0), Vec2::new(w, h), Vec2::new(0.0, h)]);
    let start = a.payload_start.map(|[x, y]| Vec2::new(x, y)).unwrap_or(Vec2::new(0.5 * w, 0.5 * h));
    let payload = PayloadObject::new(start, a.payload_mass, a.payload_damping)?;
    let rect = Rect {
        x0: 0.0,
        y0: 0.0,
        x1: w,
        y1: h,
    };
    let inset = PAYLOAD_RADIUS;
    if !(start.x >= inset && start.x <= w - inset && start.y >= inset && start.y <= h - inset) {
        return Err(Error::config("arena.payload_start", "payload must lie inside the box"));
    }
    let mut world = World::new(walls);
    world.light = light_field(spec, -90.0)?;
    world.payload_casts_shadow = spec.light.payload_shadow;
    let up = Vec2::from_angle(world.light.up_light());
    match spec.policy.kind {
        PolicyKind::TransportConnected => {
            let ring = PAYLOAD_RADIUS + ROBOT_RADIUS;
            let capacity =
                (2.0 * std::f64::consts::PI * ring / (2.0 * ROBOT_RADIUS + PLACEMENT_GAP)).floor() as usize;
            if n > capacity {
                return Err(Error::InfeasiblePacking { count: n });
            }
            for id in 0..n {
                let a = wrap_angle(2.0 * std::f64::consts::PI * id as f64 / n.max(1) as f64)?;
                let off = Vec2::from_angle(a) * ring;
                let mut r = RobotState::new(id, start + off, Angle::ZERO);
                r.attached = Some(off);
                world.robots.push(r);
            }
        }
        _ => {
            let clear = PAYLOAD_RADIUS + ROBOT_RADIUS + PLACEMENT_GAP + spec.robots.jitter;
            let keep = |p: Vec2| (p - start).norm() > clear;
            for (id, p) in spread_lattice(rect, n, spec.robots.jitter, &keep, rng)?.into_iter().enumerate() {
                world.robots.push(RobotState::new(id, p, Angle::ZERO));
            }
        }
    }
    world.payload = Some(payload);
    // project the box corners on the up-light axis to find the lit wall
    let corners = [Vec2::new(0.0, 0.0), Vec2::new(w, 0.0), Vec2::new(w, h), Vec2::new(0.0, h)];
    let lit_wall = corners.iter().map(|c| c.dot(up)).fold(f64::NEG_INFINITY, f64::max);
    let goal_center = lit_wall - a.goal_offset.unwrap_or(2.0 * PAYLOAD_RADIUS);
    let layout = Layout::Transport {
        goal_center,
        goal_half_width: a.goal_half_width.unwrap_or(PAYLOAD_RADIUS),
    };
    Ok((world, vec![Role::Free; n], layout, rect))
}
