use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Angle, Vec2};

/// Robot diameter is 33 mm.
pub const ROBOT_RADIUS: f64 = 16.5;
/// Payload diameter is 100 mm.
pub const PAYLOAD_RADIUS: f64 = 50.0;

/// Behavioural phase label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Gas,
    Liquid,
    #[default]
    Unlabeled,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Gas => "gas",
            Phase::Liquid => "liquid",
            Phase::Unlabeled => "unlabeled",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        match s {
            "gas" => Some(Phase::Gas),
            "liquid" => Some(Phase::Liquid),
            "unlabeled" => Some(Phase::Unlabeled),
            _ => None,
        }
    }
}

/// One kinematic disk agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: usize,
    pub pos: Vec2,
    pub heading: Angle,
    /// Commanded speed, mm/s.
    pub cmd_speed: f64,
    pub radius: f64,
    pub phase: Phase,
    /// Offset from the payload centre when rigidly attached to it.
    pub attached: Option<Vec2>,
}

impl RobotState {
    pub fn new(id: usize, pos: Vec2, heading: Angle) -> RobotState {
        RobotState {
            id,
            pos,
            heading,
            cmd_speed: 0.0,
            radius: ROBOT_RADIUS,
            phase: Phase::Unlabeled,
            attached: None,
        }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.heading) * self.cmd_speed
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.pos.is_finite() {
            return Err(Error::NonFinite("robot position"));
        }
        if !(self.radius > 0.0) {
            return Err(Error::invalid("radius", format!("robot {} radius {} <= 0", self.id, self.radius)));
        }
        if !(self.cmd_speed >= 0.0) || !self.cmd_speed.is_finite() {
            return Err(Error::invalid("cmd_speed", format!("robot {} speed {}", self.id, self.cmd_speed)));
        }
        Ok(())
    }
}

/// A static wall segment. Robots are kept at least one radius away from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Segment {
        Segment { a, b }
    }

    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let ab = self.b - self.a;
        let len2 = ab.norm_sq();
        if len2 == 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(ab) / len2).clamp(0.0, 1.0);
        self.a + ab * t
    }

    /// Left-hand unit normal of `a → b`.
    pub fn normal(&self) -> Vec2 {
        let d = (self.b - self.a).normalized().unwrap_or(Vec2::new(1.0, 0.0));
        Vec2::new(-d.y, d.x)
    }
}

/// Closed polygon as a list of segments.
pub fn polygon(vertices: &[Vec2]) -> Vec<Segment> {
    let n = vertices.len();
    (0..n).map(|i| Segment::new(vertices[i], vertices[(i + 1) % n])).collect()
}

/// The pushable disk of the transport experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadObject {
    pub pos: Vec2,
    pub radius: f64,
    pub mass: f64,
    pub velocity: Vec2,
    /// Linear drag coefficient (mass/s).
    pub damping: f64,
}

impl PayloadObject {
    pub fn new(pos: Vec2, mass: f64, damping: f64) -> Result<PayloadObject> {
        let p = PayloadObject {
            pos,
            radius: PAYLOAD_RADIUS,
            mass,
            velocity: Vec2::ZERO,
            damping,
        };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::invalid("payload.radius", format!("{} <= 0", self.radius)));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::invalid("payload.mass", format!("{} <= 0", self.mass)));
        }
        if !(self.damping >= 0.0) {
            return Err(Error::invalid("payload.damping", format!("{} < 0", self.damping)));
        }
        if !self.pos.is_finite() {
            return Err(Error::NonFinite("payload position"));
        }
        Ok(())
    }
}

/// Which side of the box a piston closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PistonSide {
    /// Lower wall; the interior lies at larger `y`.
    Bottom,
    /// Upper wall; the interior lies at smaller `y`.
    Top,
}

impl PistonSide {
    /// `+1` if moving towards larger `y` compresses the box.
    pub fn inward(self) -> f64 {
        match self {
            PistonSide::Bottom => 1.0,
            PistonSide::Top => -1.0,
        }
    }
}

/// A horizontal movable wall loaded by a constant inward force.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PistonWall {
    pub side: PistonSide,
    /// `y` coordinate of the wall face.
    pub position: f64,
    pub x_min: f64,
    pub width: f64,
    pub mass: f64,
    /// Constant load pushing towards the interior.
    pub external_force: f64,
    /// Inward velocity (positive compresses).
    pub velocity: f64,
    pub damping: f64,
    /// Allowed range of `position`.
    pub travel: (f64, f64),
    pub locked: bool,
    /// Total outward impulse delivered by contacts since creation.
    pub impulse_total: f64,
}

impl PistonWall {
    /// Damping that critically damps the piston against the linearised
    /// stiffness `F / gap` of an ideal gas held at load `F`; `mass / 1 s`
    /// when unloaded.
    pub fn critical_damping(mass: f64, force: f64, gap: f64) -> f64 {
        if force > 0.0 && gap > 0.0 {
            2.0 * (mass * force / gap).sqrt()
        } else {
            mass
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(Error::invalid("piston.width", format!("{} <= 0", self.width)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::invalid("piston.mass", format!("{} <= 0", self.mass)));
        }
        if !(self.external_force >= 0.0) || !self.external_force.is_finite() {
            return Err(Error::invalid("piston.force", format!("{} < 0", self.external_force)));
        }
        if !(self.damping >= 0.0) {
            return Err(Error::invalid("piston.damping", format!("{} < 0", self.damping)));
        }
        if !(self.travel.0 <= self.travel.1) {
            return Err(Error::invalid("piston.travel", format!("{:?}", self.travel)));
        }
        Ok(())
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.width
    }

    /// Signed distance from the wall face into the interior.
    pub fn depth(&self, p: Vec2) -> f64 {
        (p.y - self.position) * self.side.inward()
    }
}
