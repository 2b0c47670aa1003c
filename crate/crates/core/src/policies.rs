//! Decentralized per-robot controllers.
//!
//! Each decision sees only the robot's own state, the light field, the
//! policy configuration and the robot's private random stream. Nothing
//! about other robots is reachable from here.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxent::{
    sample_heading_normal, sample_heading_uniform, sample_speed_with, sample_steering_rate, SpeedLaw,
    SteeringTempFn,
};
use crate::rng::RngStream;
use crate::sensing::{light_intensity, turn_to_angle, LightField, ALIGN_STEP_DEG, ALIGN_TOL};
use crate::units::{Angle, EnergyTemp};
use crate::world::{Phase, RobotState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    NarrowRoad,
    Compression,
    TransportConnected,
    TransportFree,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::NarrowRoad => "narrow_road",
            PolicyKind::Compression => "compression",
            PolicyKind::TransportConnected => "transport_connected",
            PolicyKind::TransportFree => "transport_free",
        }
    }
}

/// How narrow-road robots pick a heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringMode {
    /// Fresh wrapped-normal heading about the travel direction every tick.
    #[default]
    NormalHeading,
    /// Heading integrates an exponential steering rate.
    ExponentialRate,
}

/// Named steering-temperature tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteeringPreset {
    AntDecreasing,
}

/// Travel direction on the road. `Down` heads towards the light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalDir {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default)]
    pub kt: Option<EnergyTemp>,
    #[serde(default)]
    pub kt_gas: Option<EnergyTemp>,
    #[serde(default)]
    pub kt_liquid: Option<EnergyTemp>,
    #[serde(default)]
    pub l_thread: Option<f64>,
    /// Degrees.
    #[serde(default = "default_sigma")]
    pub heading_sigma: f64,
    #[serde(default)]
    pub steering: SteeringMode,
    /// Knot table for [`SteeringMode::ExponentialRate`].
    #[serde(default)]
    pub steering_temp: Option<SteeringTempFn>,
    #[serde(default)]
    pub steering_preset: Option<SteeringPreset>,
    /// Seconds a sampled command is held.
    #[serde(default = "default_tick")]
    pub decision_tick: f64,
    #[serde(default)]
    pub speed_law: SpeedLaw,
    /// Degrees per alignment step.
    #[serde(default = "default_align_step")]
    pub align_step: f64,
    #[serde(default = "default_align_tol")]
    pub align_tol: f64,
}

fn default_sigma() -> f64 {
    180.0
}
fn default_tick() -> f64 {
    1.0
}
fn default_align_step() -> f64 {
    ALIGN_STEP_DEG
}
fn default_align_tol() -> f64 {
    ALIGN_TOL
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> PolicyConfig {
        PolicyConfig {
            kind,
            kt: None,
            kt_gas: None,
            kt_liquid: None,
            l_thread: None,
            heading_sigma: default_sigma(),
            steering: SteeringMode::default(),
            steering_temp: None,
            steering_preset: None,
            decision_tick: default_tick(),
            speed_law: SpeedLaw::default(),
            align_step: default_align_step(),
            align_tol: default_align_tol(),
        }
    }

    pub fn narrow_road(kt: f64, sigma_deg: f64) -> Result<PolicyConfig> {
        let mut c = PolicyConfig::new(PolicyKind::NarrowRoad);
        c.kt = Some(EnergyTemp::try_from(kt)?);
        c.heading_sigma = sigma_deg;
        c.validate()?;
        Ok(c)
    }

    pub fn compression(kt: f64) -> Result<PolicyConfig> {
        let mut c = PolicyConfig::new(PolicyKind::Compression);
        c.kt = Some(EnergyTemp::try_from(kt)?);
        c.validate()?;
        Ok(c)
    }

    pub fn transport_connected(kt: f64) -> Result<PolicyConfig> {
        let mut c = PolicyConfig::new(PolicyKind::TransportConnected);
        c.kt = Some(EnergyTemp::try_from(kt)?);
        c.validate()?;
        Ok(c)
    }

    pub fn transport_free(kt_gas: f64, kt_liquid: f64, l_thread: f64) -> Result<PolicyConfig> {
        let mut c = PolicyConfig::new(PolicyKind::TransportFree);
        c.kt_gas = Some(EnergyTemp::try_from(kt_gas)?);
        c.kt_liquid = Some(EnergyTemp::try_from(kt_liquid)?);
        c.l_thread = Some(l_thread);
        c.validate()?;
        Ok(c)
    }

    fn temp(key: &str, t: Option<EnergyTemp>) -> Result<EnergyTemp> {
        let t = t.ok_or_else(|| Error::config(key, "required for this policy kind"))?;
        if t.is_degenerate() {
            return Err(Error::config(key, "temperature must be > 0"));
        }
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decision_tick > 0.0) || !self.decision_tick.is_finite() {
            return Err(Error::config("policy.decision_tick", "must be > 0"));
        }
        if !(self.align_step > 0.0) || !(self.align_tol >= 0.0) {
            return Err(Error::config("policy.align_step", "step must be > 0 and tol >= 0"));
        }
        match self.kind {
            PolicyKind::NarrowRoad => {
                Self::temp("policy.kt", self.kt)?;
                if !(self.heading_sigma > 0.0) || !self.heading_sigma.is_finite() {
                    return Err(Error::config("policy.heading_sigma", "must be > 0"));
                }
                if self.steering_temp.is_some() && self.steering_preset.is_some() {
                    return Err(Error::config("policy.steering_temp", "conflicts with steering_preset"));
                }
            }
            PolicyKind::Compression | PolicyKind::TransportConnected => {
                Self::temp("policy.kt", self.kt)?;
            }
            PolicyKind::TransportFree => {
                let g = Self::temp("policy.kt_gas", self.kt_gas)?;
                let l = Self::temp("policy.kt_liquid", self.kt_liquid)?;
                if !(g.kt() > l.kt()) {
                    return Err(Error::config("policy.kt_gas", "must exceed kt_liquid"));
                }
                let th = self
                    .l_thread
                    .ok_or_else(|| Error::config("policy.l_thread", "required for this policy kind"))?;
                if !(th > 0.0 && th < 1.0) {
                    return Err(Error::config("policy.l_thread", "must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    fn expect(&self, kind: PolicyKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::config(
                "policy.kind",
                format!("expected {}, got {}", kind.as_str(), self.kind.as_str()),
            ));
        }
        self.validate()
    }

    /// Steering-temperature table for the exponential-rate mode.
    pub fn steering_fn(&self) -> Result<SteeringTempFn> {
        if let Some(f) = &self.steering_temp {
            return Ok(f.clone());
        }
        match self.steering_preset {
            Some(SteeringPreset::AntDecreasing) => Ok(SteeringTempFn::ant_decreasing()),
            None => SteeringTempFn::constant(EnergyTemp::new(1.0)?),
        }
    }
}

/// A sampled action held for one decision tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionCommand {
    pub heading: Angle,
    pub speed: f64,
    pub phase: Phase,
}

/// Phase selected by the local light level; equality goes to liquid.
pub fn phase_for_light(l: f64, l_thread: f64) -> Phase {
    if l > l_thread {
        Phase::Gas
    } else {
        Phase::Liquid
    }
}

fn speed(cfg: &PolicyConfig, t: EnergyTemp, rng: &mut RngStream) -> Result<f64> {
    sample_speed_with(cfg.speed_law, t, rng)
}

/// Align to the light, then draw a wrapped-normal heading about the travel
/// direction (`0°` from the up-light axis for down-movers, `180°` for
/// up-movers) and an exponential-energy speed.
pub fn decide_narrow_road(
    robot: &RobotState,
    goal: GoalDir,
    cfg: &PolicyConfig,
    field: &LightField,
    rng: &mut RngStream,
) -> Result<ActionCommand> {
    cfg.expect(PolicyKind::NarrowRoad)?;
    let kt = PolicyConfig::temp("policy.kt", cfg.kt)?;
    turn_to_angle(robot, field, cfg.align_step, cfg.align_tol)?;
    let v = speed(cfg, kt, rng)?;
    let heading = match cfg.steering {
        SteeringMode::NormalHeading => {
            let axis = field.up_light();
            let mean = match goal {
                GoalDir::Down => axis,
                GoalDir::Up => axis.offset(PI),
            };
            sample_heading_normal(mean, cfg.heading_sigma, rng)?
        }
        SteeringMode::ExponentialRate => {
            let f = cfg.steering_fn()?;
            let rate = sample_steering_rate(v, &f, rng)?;
            robot.heading.offset(rate * cfg.decision_tick)
        }
    };
    Ok(ActionCommand {
        heading,
        speed: v,
        phase: Phase::Unlabeled,
    })
}

/// Uniform heading, constant temperature.
pub fn decide_compression(_robot: &RobotState, cfg: &PolicyConfig, rng: &mut RngStream) -> Result<ActionCommand> {
    cfg.expect(PolicyKind::Compression)?;
    let kt = PolicyConfig::temp("policy.kt", cfg.kt)?;
    let heading = sample_heading_uniform(-PI, PI, rng)?;
    Ok(ActionCommand {
        heading,
        speed: speed(cfg, kt, rng)?,
        phase: Phase::Unlabeled,
    })
}

/// Align to the light, then head within ±90° of it. A robot in shadow
/// cannot align and picks a heading on the full circle instead.
pub fn decide_transport_connected(
    robot: &RobotState,
    cfg: &PolicyConfig,
    field: &LightField,
    rng: &mut RngStream,
) -> Result<ActionCommand> {
    cfg.expect(PolicyKind::TransportConnected)?;
    let kt = PolicyConfig::temp("policy.kt", cfg.kt)?;
    let heading = match turn_to_angle(robot, field, cfg.align_step, cfg.align_tol) {
        Ok(_) => {
            let up = field.up_light().radians();
            sample_heading_uniform(up - FRAC_PI_2, up + FRAC_PI_2, rng)?
        }
        Err(Error::AlignmentImpossible(_)) => sample_heading_uniform(-PI, PI, rng)?,
        Err(e) => return Err(e),
    };
    Ok(ActionCommand {
        heading,
        speed: speed(cfg, kt, rng)?,
        phase: Phase::Unlabeled,
    })
}

/// Temperature switched by the local light: lit robots run hot (gas),
/// shadowed ones cold (liquid). Heading is uniform.
pub fn decide_transport_free(
    robot: &RobotState,
    cfg: &PolicyConfig,
    field: &LightField,
    rng: &mut RngStream,
) -> Result<ActionCommand> {
    cfg.expect(PolicyKind::TransportFree)?;
    let l_thread = cfg.l_thread.unwrap_or(0.5);
    let phase = phase_for_light(light_intensity(robot.pos, field), l_thread);
    let t = match phase {
        Phase::Gas => PolicyConfig::temp("policy.kt_gas", cfg.kt_gas)?,
        _ => PolicyConfig::temp("policy.kt_liquid", cfg.kt_liquid)?,
    };
    let heading = sample_heading_uniform(-PI, PI, rng)?;
    Ok(ActionCommand {
        heading,
        speed: speed(cfg, t, rng)?,
        phase,
    })
}

/// The per-robot role a scenario assigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Free,
    Road(GoalDir),
}

/// Dispatches on the configured kind.
pub fn decide(
    robot: &RobotState,
    role: Role,
    cfg: &PolicyConfig,
    field: &LightField,
    rng: &mut RngStream,
) -> Result<ActionCommand> {
    match cfg.kind {
        PolicyKind::NarrowRoad => {
            let goal = match role {
                Role::Road(g) => g,
                Role::Free => GoalDir::Down,
            };
            decide_narrow_road(robot, goal, cfg, field, rng)
        }
        PolicyKind::Compression => decide_compression(robot, cfg, rng),
        PolicyKind::TransportConnected => decide_transport_connected(robot, cfg, field, rng),
        PolicyKind::TransportFree => decide_transport_free(robot, cfg, field, rng),
    }
}

impl RobotState {
    pub fn apply(&mut self, cmd: &ActionCommand) {
        self.heading = cmd.heading;
        self.cmd_speed = cmd.speed;
        if cmd.phase != Phase::Unlabeled {
            self.phase = cmd.phase;
        }
    }
}
