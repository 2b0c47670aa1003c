//! Directional light, payload shadows and the photoresistor triad.
//!
//! Light arrives as parallel rays travelling along `direction`. A point is
//! dark when the ray back towards the source (the up-light direction) is
//! blocked by an occluder disk, so each occluder casts a half-infinite
//! stripe of width `2r` behind itself.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{deg_to_rad, Angle, Vec2};
use crate::world::RobotState;

/// Default balance tolerance for alignment.
pub const ALIGN_TOL: f64 = 0.02;
/// Default rotation step for alignment, degrees.
pub const ALIGN_STEP_DEG: f64 = 5.0;

/// Sensor normals relative to the heading: front-left, front-right, rear.
pub const SENSOR_OFFSETS: [f64; 3] = [FRAC_PI_4, -FRAC_PI_4, PI];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightField {
    /// Propagation direction of the rays.
    pub direction: Angle,
    pub intensity: f64,
    pub occluders: Vec<Disk>,
}

impl LightField {
    pub fn new(direction: Angle, intensity: f64) -> Result<LightField> {
        if !(0.0..=1.0).contains(&intensity) {
            return Err(Error::invalid("light.intensity", format!("{intensity} outside [0, 1]")));
        }
        Ok(LightField {
            direction,
            intensity,
            occluders: Vec::new(),
        })
    }

    /// A field with no light at all.
    pub fn dark() -> LightField {
        LightField {
            direction: Angle::ZERO,
            intensity: 0.0,
            occluders: Vec::new(),
        }
    }

    pub fn with_occluder(mut self, d: Disk) -> Result<LightField> {
        if !(d.radius > 0.0) || !d.center.is_finite() {
            return Err(Error::invalid("occluder", format!("{d:?}")));
        }
        self.occluders.push(d);
        Ok(self)
    }

    /// Direction pointing towards the light source.
    pub fn up_light(&self) -> Angle {
        self.direction.offset(PI)
    }

    /// Rotates direction and occluders about the origin.
    pub fn rotated(&self, a: Angle) -> LightField {
        LightField {
            direction: self.direction.offset(a.radians()),
            intensity: self.intensity,
            occluders: self
                .occluders
                .iter()
                .map(|d| Disk {
                    center: d.center.rotated(a),
                    radius: d.radius,
                })
                .collect(),
        }
    }
}

/// Whether the ray `p + t·u`, `t ≥ 0`, passes strictly inside `d`.
fn ray_blocked(p: Vec2, u: Vec2, d: &Disk) -> bool {
    let w = d.center - p;
    let r2 = d.radius * d.radius;
    if w.norm_sq() < r2 {
        return true;
    }
    let t = w.dot(u);
    if t <= 0.0 {
        return false;
    }
    let perp = w.cross(u);
    perp * perp < r2
}

/// Intensity at `p`: zero when shadowed, the field intensity otherwise.
/// Tangent rays count as lit.
pub fn light_intensity(p: Vec2, field: &LightField) -> f64 {
    let u = Vec2::from_angle(field.up_light());
    if field.occluders.iter().any(|d| ray_blocked(p, u, d)) {
        0.0
    } else {
        field.intensity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorTriad {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

fn triad_at(pos: Vec2, heading: Angle, field: &LightField) -> SensorTriad {
    let local = light_intensity(pos, field);
    triad_from(local, heading, field.up_light())
}

fn triad_from(local: f64, heading: Angle, up: Angle) -> SensorTriad {
    let read = |off: f64| {
        let normal = heading.offset(off);
        local * normal.delta_to(up).cos().max(0.0)
    };
    SensorTriad {
        l1: read(SENSOR_OFFSETS[0]),
        l2: read(SENSOR_OFFSETS[1]),
        l3: read(SENSOR_OFFSETS[2]),
    }
}

/// Reads the three photoresistors of `robot`. Each sees the local
/// intensity weighted by a cosine lobe about its normal.
pub fn read_triad(robot: &RobotState, field: &LightField) -> SensorTriad {
    triad_at(robot.pos, robot.heading, field)
}

/// Rotates counterclockwise in `step_deg` increments until the front pair
/// balances and the rear sensor is dark. Returns the final heading and the
/// number of steps taken.
///
/// A coarse step can jump over the balance window; the scan also stops at
/// the step where `l1 - l2` changes sign from positive to negative with the
/// rear dark, which brackets the up-light direction within one step.
pub fn turn_to_angle(robot: &RobotState, field: &LightField, step_deg: f64, tol: f64) -> Result<(Angle, usize)> {
    if !(step_deg > 0.0) || !step_deg.is_finite() {
        return Err(Error::invalid("step", format!("{step_deg} must be > 0")));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol", format!("{tol} < 0")));
    }
    let local = light_intensity(robot.pos, field);
    if local <= 0.0 {
        return Err(Error::AlignmentImpossible(robot.id));
    }
    let up = field.up_light();
    let step = deg_to_rad(step_deg);
    let max_steps = (360.0 / step_deg).ceil() as usize;
    let balanced = |s: &SensorTriad| (s.l1 - s.l2).abs() <= tol && s.l3 <= tol;

    let mut heading = robot.heading;
    let mut cur = triad_from(local, heading, up);
    if balanced(&cur) {
        return Ok((heading, 0));
    }
    for k in 1..=max_steps {
        let prev = cur;
        heading = heading.offset(step);
        cur = triad_from(local, heading, up);
        let crossed = prev.l1 - prev.l2 > tol && cur.l1 - cur.l2 < -tol && cur.l3 <= tol;
        if balanced(&cur) || crossed {
            return Ok((heading, k));
        }
    }
    Err(Error::AlignmentImpossible(robot.id))
}
