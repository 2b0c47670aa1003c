//! Position projection with impulse bookkeeping.
//!
//! Robots are kinematic: overlaps are removed by moving them. A robot that
//! is blocked by a dynamic body (payload or piston) hands that body an
//! impulse `ζ·δ`, where `δ` is the blocked displacement and `ζ` the push
//! coefficient, i.e. it pushes with force `ζ·v` while pressing at speed `v`.

use serde::{Deserialize, Serialize};

use super::World;
use crate::units::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContactParams {
    /// `ζ` in mass/s (unit-mass robots).
    pub push_coefficient: f64,
    pub max_iterations: usize,
    /// Overlap below which a configuration counts as resolved, mm.
    pub tolerance: f64,
    /// Extra distance for broadphase candidates, mm.
    pub margin: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        ContactParams {
            push_coefficient: 1.0,
            max_iterations: 300,
            tolerance: 1e-3,
            margin: 5.0,
        }
    }
}

/// Residual bookkeeping across steps. A residual above tolerance is logged
/// here and the simulation carries on.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactStats {
    pub last_residual: f64,
    pub max_residual: f64,
    /// Steps that ended with a residual above tolerance.
    pub residual_events: u64,
    pub iterations_last: usize,
}

/// Candidate robot pairs `(i, j)`, `i < j`, in ascending order.
pub(crate) fn broadphase(world: &World) -> Vec<(usize, usize)> {
    let robots = &world.robots;
    let n = robots.len();
    if n < 2 {
        return Vec::new();
    }
    let rmax = robots.iter().map(|r| r.radius).fold(0.0, f64::max);
    let margin = world.contact.margin;
    let cell = 2.0 * rmax + margin;
    let (mut lo, mut hi) = (robots[0].pos, robots[0].pos);
    for r in robots {
        lo.x = lo.x.min(r.pos.x);
        lo.y = lo.y.min(r.pos.y);
        hi.x = hi.x.max(r.pos.x);
        hi.y = hi.y.max(r.pos.y);
    }
    let nx = (((hi.x - lo.x) / cell) as usize + 1).min(4096);
    let ny = (((hi.y - lo.y) / cell) as usize + 1).min(4096);
    let cell_of = |p: Vec2| {
        let cx = (((p.x - lo.x) / cell) as usize).min(nx - 1);
        let cy = (((p.y - lo.y) / cell) as usize).min(ny - 1);
        (cx, cy)
    };
    let mut count = vec![0usize; nx * ny + 1];
    let cells: Vec<(usize, usize)> = robots.iter().map(|r| cell_of(r.pos)).collect();
    for &(cx, cy) in &cells {
        count[cy * nx + cx + 1] += 1;
    }
    for k in 1..count.len() {
        count[k] += count[k - 1];
    }
    let mut slots = count.clone();
    let mut order = vec![0usize; n];
    for (i, &(cx, cy)) in cells.iter().enumerate() {
        let c = cy * nx + cx;
        order[slots[c]] = i;
        slots[c] += 1;
    }

    let mut pairs = Vec::new();
    let mut near = Vec::new();
    for i in 0..n {
        let (cx, cy) = cells[i];
        near.clear();
        for yy in cy.saturating_sub(1)..=(cy + 1).min(ny - 1) {
            for xx in cx.saturating_sub(1)..=(cx + 1).min(nx - 1) {
                let c = yy * nx + xx;
                for &j in &order[count[c]..count[c + 1]] {
                    if j > i {
                        let reach = robots[i].radius + robots[j].radius + margin;
                        if (robots[j].pos - robots[i].pos).norm_sq() < reach * reach {
                            near.push(j);
                        }
                    }
                }
            }
        }
        near.sort_unstable();
        pairs.extend(near.iter().map(|&j| (i, j)));
    }
    pairs
}

/// Free robots within reach of each static wall, as `(robot, wall)`.
fn wall_candidates(world: &World) -> Vec<(usize, usize)> {
    let margin = world.contact.margin;
    let mut out = Vec::new();
    for (k, r) in world.robots.iter().enumerate() {
        if r.attached.is_some() {
            continue;
        }
        let reach = r.radius + margin;
        for (wi, w) in world.walls.iter().enumerate() {
            if (r.pos - w.closest_point(r.pos)).norm_sq() < reach * reach {
                out.push((k, wi));
            }
        }
    }
    out
}

/// Candidate rebuilds per step.
const MAX_REBUILDS: usize = 4;

fn contact_normal(d: Vec2, dist: f64) -> Vec2 {
    if dist > 0.0 {
        d * (1.0 / dist)
    } else {
        Vec2::new(1.0, 0.0)
    }
}

impl World {
    /// Removes overlaps by Gauss-Seidel projection. Pairs are visited in
    /// ascending id order, then the payload, pistons and static walls.
    /// Candidate lists are rebuilt when the projection moves a robot by
    /// more than half the broadphase margin, since it may then reach
    /// bodies that were not candidates.
    pub fn resolve_contacts(&mut self) {
        let zeta = self.contact.push_coefficient;
        let tol = self.contact.tolerance;
        let slack = 0.5 * self.contact.margin;
        let mut iterations = 0;
        let mut pairs = broadphase(self);
        for _ in 0..MAX_REBUILDS {
            let wall_pairs = wall_candidates(self);
            let start: Vec<Vec2> = self.robots.iter().map(|r| r.pos).collect();
            for _ in 0..self.contact.max_iterations {
                iterations += 1;
                let worst = self.projection_pass(&pairs, &wall_pairs, zeta);
                if worst < tol {
                    break;
                }
            }
            let moved = self
                .robots
                .iter()
                .zip(&start)
                .any(|(r, p0)| (r.pos - *p0).norm_sq() > slack * slack);
            if !moved {
                break;
            }
            pairs = broadphase(self);
        }
        let residual = self.max_overlap(&pairs);
        let s = &mut self.stats;
        s.iterations_last = iterations;
        s.last_residual = residual;
        s.max_residual = s.max_residual.max(residual);
        if residual >= tol {
            s.residual_events += 1;
        }
    }

    fn projection_pass(&mut self, pairs: &[(usize, usize)], wall_pairs: &[(usize, usize)], zeta: f64) -> f64 {
        let mut worst: f64 = 0.0;
        let payload_center = self.payload.as_ref().map(|p| p.pos);

        for &(i, j) in pairs {
            let reach = self.robots[i].radius + self.robots[j].radius;
            let d = self.robots[j].pos - self.robots[i].pos;
            let d2 = d.norm_sq();
            if d2 >= reach * reach {
                continue;
            }
            let dist = d2.sqrt();
            let overlap = reach - dist;
            worst = worst.max(overlap);
            let n = contact_normal(d, dist);
            match (self.robots[i].attached.is_some(), self.robots[j].attached.is_some()) {
                (false, false) => {
                    self.robots[i].pos -= n * (0.5 * overlap);
                    self.robots[j].pos += n * (0.5 * overlap);
                }
                (true, false) => {
                    self.robots[j].pos += n * overlap;
                    self.push_payload(n * -1.0, overlap, zeta);
                }
                (false, true) => {
                    self.robots[i].pos -= n * overlap;
                    self.push_payload(n, overlap, zeta);
                }
                (true, true) => {}
            }
        }

        if let Some(c) = payload_center {
            let pr = self.payload.as_ref().map(|p| p.radius).unwrap_or(0.0);
            for k in 0..self.robots.len() {
                if self.robots[k].attached.is_some() {
                    continue;
                }
                let d = self.robots[k].pos - c;
                let reach = self.robots[k].radius + pr;
                let d2 = d.norm_sq();
                if d2 < reach * reach {
                    let dist = d2.sqrt();
                    let overlap = reach - dist;
                    worst = worst.max(overlap);
                    let n = contact_normal(d, dist);
                    self.robots[k].pos += n * overlap;
                    self.push_payload(n * -1.0, overlap, zeta);
                }
            }
        }

        for pi in 0..self.pistons.len() {
            for k in 0..self.robots.len() {
                if self.robots[k].attached.is_some() {
                    continue;
                }
                let p = &self.pistons[pi];
                let overlap = self.robots[k].radius - p.depth(self.robots[k].pos);
                if overlap > 0.0 {
                    worst = worst.max(overlap);
                    let inward = p.side.inward();
                    self.robots[k].pos.y += inward * overlap;
                    let j = zeta * overlap;
                    let p = &mut self.pistons[pi];
                    p.impulse_total += j;
                    if !p.locked {
                        p.velocity -= j / p.mass;
                    }
                }
            }
        }

        for &(k, wi) in wall_pairs {
            let r = self.robots[k].radius;
            {
                let w = &self.walls[wi];
                let p = self.robots[k].pos;
                let q = w.closest_point(p);
                let d = p - q;
                let d2 = d.norm_sq();
                if d2 < r * r {
                    let dist = d2.sqrt();
                    let overlap = r - dist;
                    worst = worst.max(overlap);
                    let n = if dist > 0.0 { d * (1.0 / dist) } else { w.normal() };
                    self.robots[k].pos += n * overlap;
                }
            }
        }

        worst = worst.max(self.project_payload_walls());
        worst
    }

    fn push_payload(&mut self, dir: Vec2, overlap: f64, zeta: f64) {
        if let Some(p) = self.payload.as_mut() {
            p.velocity += dir * (zeta * overlap / p.mass);
        }
    }

    /// Keeps the payload (and anything attached to it) inside the walls;
    /// the velocity component into a wall is removed.
    fn project_payload_walls(&mut self) -> f64 {
        let Some(mut pl) = self.payload.clone() else {
            return 0.0;
        };
        let mut bodies: Vec<(Vec2, f64)> = vec![(Vec2::ZERO, pl.radius)];
        bodies.extend(self.robots.iter().filter_map(|r| r.attached.map(|o| (o, r.radius))));
        let mut worst: f64 = 0.0;
        for w in &self.walls {
            for &(off, rad) in &bodies {
                let p = pl.pos + off;
                let q = w.closest_point(p);
                let d = p - q;
                let dist = d.norm();
                let overlap = rad - dist;
                if overlap > 0.0 {
                    worst = worst.max(overlap);
                    let n = if dist > 0.0 { d * (1.0 / dist) } else { w.normal() };
                    pl.pos += n * overlap;
                    let vn = pl.velocity.dot(n);
                    if vn < 0.0 {
                        pl.velocity -= n * vn;
                    }
                }
            }
        }
        if worst > 0.0 {
            for r in self.robots.iter_mut() {
                if let Some(o) = r.attached {
                    r.pos = pl.pos + o;
                }
            }
            self.payload = Some(pl);
        }
        worst
    }

    /// Largest remaining overlap over every constraint.
    pub(crate) fn max_overlap(&self, pairs: &[(usize, usize)]) -> f64 {
        let mut worst: f64 = 0.0;
        for &(i, j) in pairs {
            let (a, b) = (&self.robots[i], &self.robots[j]);
            if a.attached.is_some() && b.attached.is_some() {
                continue;
            }
            worst = worst.max(a.radius + b.radius - (b.pos - a.pos).norm());
        }
        let free = self.robots.iter().filter(|r| r.attached.is_none());
        for r in free {
            if let Some(pl) = &self.payload {
                worst = worst.max(r.radius + pl.radius - (r.pos - pl.pos).norm());
            }
            for p in &self.pistons {
                worst = worst.max(r.radius - p.depth(r.pos));
            }
            for w in &self.walls {
                worst = worst.max(r.radius - (r.pos - w.closest_point(r.pos)).norm());
            }
        }
        worst.max(0.0)
    }

    /// Largest overlap over all pairs, computed without the broadphase.
    pub fn overlap_residual(&self) -> f64 {
        let n = self.robots.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        self.max_overlap(&pairs)
    }
}
