//! Fixed-step 2D physics for kinematic disk robots, static walls,
//! force-loaded pistons and a pushable payload.

mod bodies;
mod contacts;
mod pressure;

pub use bodies::{
    polygon, Phase, PayloadObject, PistonSide, PistonWall, RobotState, Segment, PAYLOAD_RADIUS, ROBOT_RADIUS,
};
pub use contacts::{ContactParams, ContactStats};
pub use pressure::{equilibrium_volume, wall_pressure, PressureProbe, PressureSample, SettleCriteria};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::{Disk, LightField};
use crate::units::Vec2;

/// Physics substep used by every scenario unless overridden.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct World {
    pub walls: Vec<Segment>,
    pub pistons: Vec<PistonWall>,
    pub robots: Vec<RobotState>,
    pub payload: Option<PayloadObject>,
    /// Static light; the payload is appended as an occluder when it casts a
    /// shadow (see [`World::light`]).
    pub light: LightField,
    pub payload_casts_shadow: bool,
    pub time: f64,
    pub contact: ContactParams,
    /// Smallest allowed distance between two facing pistons.
    pub min_piston_gap: f64,
    pub stats: ContactStats,
    /// `(time, cumulative impulse per piston)`, oldest first.
    impulse_log: VecDeque<(f64, Vec<f64>)>,
    /// How far back the impulse log reaches, s.
    pub log_horizon: f64,
}

impl World {
    pub fn new(walls: Vec<Segment>) -> World {
        World {
            walls,
            pistons: Vec::new(),
            robots: Vec::new(),
            payload: None,
            light: LightField::dark(),
            payload_casts_shadow: false,
            time: 0.0,
            contact: ContactParams::default(),
            min_piston_gap: 2.0 * ROBOT_RADIUS,
            stats: ContactStats::default(),
            impulse_log: VecDeque::from([(0.0, Vec::new())]),
            log_horizon: 2000.0,
        }
    }

    pub fn with_pistons(mut self, pistons: Vec<PistonWall>) -> World {
        let n = pistons.len();
        self.pistons = pistons;
        self.impulse_log = VecDeque::from([(self.time, vec![0.0; n])]);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.robots {
            r.validate()?;
        }
        for p in &self.pistons {
            p.validate()?;
        }
        if let Some(p) = &self.payload {
            p.validate()?;
        }
        if self.pistons.len() > 2 {
            return Err(Error::invalid("pistons", format!("{} > 2", self.pistons.len())));
        }
        Ok(())
    }

    /// The light field including the payload shadow at its current position.
    pub fn light(&self) -> LightField {
        let mut f = self.light.clone();
        if self.payload_casts_shadow {
            if let Some(p) = &self.payload {
                f.occluders.push(Disk {
                    center: p.pos,
                    radius: p.radius,
                });
            }
        }
        f
    }

    /// Advances by one substep.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("{dt} must be > 0")));
        }
        for r in self.robots.iter_mut().filter(|r| r.attached.is_none()) {
            r.pos += r.velocity() * dt;
        }
        self.integrate_payload(dt);
        self.integrate_pistons(dt);
        self.resolve_contacts();
        self.time += dt;
        self.log_impulses();
        Ok(())
    }

    fn integrate_payload(&mut self, dt: f64) {
        let zeta = self.contact.push_coefficient;
        let Some(p) = self.payload.as_mut() else {
            return;
        };
        let drive = self
            .robots
            .iter()
            .filter(|r| r.attached.is_some())
            .fold(Vec2::ZERO, |acc, r| acc + r.velocity() * zeta);
        if p.damping > 0.0 {
            // exact solution of M v' = F - c v over the substep
            let terminal = drive * (1.0 / p.damping);
            let decay = (-p.damping * dt / p.mass).exp();
            p.velocity = terminal + (p.velocity - terminal) * decay;
        } else {
            p.velocity += drive * (dt / p.mass);
        }
        p.pos += p.velocity * dt;
        let c = p.pos;
        for r in self.robots.iter_mut() {
            if let Some(o) = r.attached {
                r.pos = c + o;
            }
        }
    }

    fn integrate_pistons(&mut self, dt: f64) {
        for p in self.pistons.iter_mut() {
            if p.locked {
                p.velocity = 0.0;
                continue;
            }
            p.velocity += (p.external_force - p.damping * p.velocity) * dt / p.mass;
            p.position += p.side.inward() * p.velocity * dt;
            let (lo, hi) = p.travel;
            if p.position < lo || p.position > hi {
                p.position = p.position.clamp(lo, hi);
                p.velocity = 0.0;
            }
        }
        if let Some((b, t)) = self.facing_pistons() {
            let gap = self.pistons[t].position - self.pistons[b].position;
            if gap < self.min_piston_gap {
                let mid = 0.5 * (self.pistons[t].position + self.pistons[b].position);
                let half = 0.5 * self.min_piston_gap;
                for (k, s) in [(b, -1.0), (t, 1.0)] {
                    let p = &mut self.pistons[k];
                    if !p.locked {
                        p.position = mid + s * half;
                        p.velocity = p.velocity.min(0.0);
                    }
                }
            }
        }
    }

    /// Indices of a bottom and a top piston, if both exist.
    fn facing_pistons(&self) -> Option<(usize, usize)> {
        let b = self.pistons.iter().position(|p| p.side == PistonSide::Bottom)?;
        let t = self.pistons.iter().position(|p| p.side == PistonSide::Top)?;
        Some((b, t))
    }

    /// Area enclosed by the pistons: the gap between a facing pair, or for a
    /// single piston the distance to the far end of its travel.
    pub fn volume(&self) -> Result<f64> {
        if let Some((b, t)) = self.facing_pistons() {
            let (pb, pt) = (&self.pistons[b], &self.pistons[t]);
            return Ok((pt.position - pb.position).max(0.0) * pb.width.min(pt.width));
        }
        let p = self.pistons.first().ok_or(Error::NoPiston)?;
        let far = match p.side {
            PistonSide::Bottom => p.travel.1 - p.position,
            PistonSide::Top => p.position - p.travel.0,
        };
        Ok(far.max(0.0) * p.width)
    }

    /// Distance between facing pistons (or to the far travel end).
    pub fn piston_gap(&self) -> Result<f64> {
        let w = self.pistons.first().ok_or(Error::NoPiston)?.width;
        Ok(self.volume()? / w)
    }

    fn log_impulses(&mut self) {
        if self.pistons.is_empty() {
            return;
        }
        let cum: Vec<f64> = self.pistons.iter().map(|p| p.impulse_total).collect();
        self.impulse_log.push_back((self.time, cum));
        let horizon = self.time - self.log_horizon;
        while self.impulse_log.len() > 2 && self.impulse_log[1].0 <= horizon {
            self.impulse_log.pop_front();
        }
    }

    /// Cumulative piston impulses at the latest logged time `<= t`, or the
    /// oldest entry if `t` predates the log.
    pub(crate) fn impulses_at(&self, t: f64) -> (f64, Vec<f64>) {
        let log = &self.impulse_log;
        let k = log.partition_point(|(ti, _)| *ti <= t + 1e-9);
        let (ti, cum) = &log[k.saturating_sub(1)];
        let cum = if cum.len() == self.pistons.len() {
            cum.clone()
        } else {
            vec![0.0; self.pistons.len()]
        };
        (*ti, cum)
    }
}

#[cfg(test)]
mod tests;
