use serde::{Deserialize, Serialize};

use super::World;
use crate::error::{Error, Result};

/// Time-averaged load delivered to the pistons over a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureSample {
    pub window: (f64, f64),
    /// Impulse onto each piston during the window.
    pub impulse_sum: Vec<f64>,
    /// Force per unit wall length.
    pub pressure: f64,
    /// Enclosed area at the end of the window, mm².
    pub volume: f64,
}

/// Marks a starting point for measuring pressure over an arbitrary span.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureProbe {
    t0: f64,
    cum: Vec<f64>,
}

impl PressureProbe {
    pub fn start(&self) -> f64 {
        self.t0
    }
}

impl World {
    pub fn pressure_probe(&self) -> Result<PressureProbe> {
        if self.pistons.is_empty() {
            return Err(Error::NoPiston);
        }
        Ok(PressureProbe {
            t0: self.time,
            cum: self.pistons.iter().map(|p| p.impulse_total).collect(),
        })
    }

    pub fn pressure_since(&self, probe: &PressureProbe) -> Result<PressureSample> {
        if self.pistons.is_empty() {
            return Err(Error::NoPiston);
        }
        self.sample_between(probe.t0, &probe.cum)
    }

    fn sample_between(&self, t0: f64, cum0: &[f64]) -> Result<PressureSample> {
        let t1 = self.time;
        let impulse_sum: Vec<f64> = self
            .pistons
            .iter()
            .zip(cum0)
            .map(|(p, c)| p.impulse_total - c)
            .collect();
        let width: f64 = self.pistons.iter().map(|p| p.width).sum();
        let span = t1 - t0;
        let pressure = if span > 0.0 {
            impulse_sum.iter().sum::<f64>() / (span * width)
        } else {
            0.0
        };
        Ok(PressureSample {
            window: (t0, t1),
            impulse_sum,
            pressure,
            volume: self.volume()?,
        })
    }
}

/// Pressure over the trailing `window` seconds. Windows longer than the
/// simulated (or logged) history are truncated to it.
pub fn wall_pressure(world: &World, window: f64) -> Result<PressureSample> {
    if world.pistons.is_empty() {
        return Err(Error::NoPiston);
    }
    if !(window > 0.0) {
        return Err(Error::invalid("window", format!("{window} must be > 0")));
    }
    let (t0, cum) = world.impulses_at(world.time - window);
    world.sample_between(t0, &cum)
}

/// When the pistons count as settled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettleCriteria {
    pub dt: f64,
    /// Averaging window, s.
    pub window: f64,
    /// Largest drift of the window-mean gap, mm/s, still counted as rest.
    pub velocity_threshold: f64,
    pub max_time: f64,
}

impl Default for SettleCriteria {
    fn default() -> Self {
        SettleCriteria {
            dt: super::DEFAULT_DT,
            window: 200.0,
            velocity_threshold: 0.05,
            max_time: 20_000.0,
        }
    }
}

/// Loads every unlocked piston with `force` and integrates until the
/// window-mean piston gap stops drifting. `drive` runs before each
/// substep and is where robot decisions are made. Returns the mean volume
/// and the pressure over the final window.
///
/// The drift between consecutive window means is used rather than the
/// instantaneous piston speed, which never falls below the contact noise.
pub fn equilibrium_volume(
    world: &mut World,
    force: f64,
    settle: &SettleCriteria,
    drive: &mut dyn FnMut(&mut World) -> Result<()>,
) -> Result<(f64, f64)> {
    if world.pistons.is_empty() {
        return Err(Error::NoPiston);
    }
    if !(force >= 0.0) || !force.is_finite() {
        return Err(Error::invalid("force", format!("{force} must be >= 0")));
    }
    if !(settle.window > 0.0 && settle.dt > 0.0 && settle.max_time > 0.0) {
        return Err(Error::invalid("settle", format!("{settle:?}")));
    }
    for p in world.pistons.iter_mut().filter(|p| !p.locked) {
        p.external_force = force;
    }
    let steps_per_window = (settle.window / settle.dt).round().max(1.0) as usize;
    let t_start = world.time;
    let mut trace = Vec::new();
    let mut prev_mean: Option<f64> = None;
    loop {
        let probe = world.pressure_probe()?;
        let mut gap_sum = 0.0;
        for _ in 0..steps_per_window {
            drive(world)?;
            world.step(settle.dt)?;
            gap_sum += world.piston_gap()?;
        }
        let mean_gap = gap_sum / steps_per_window as f64;
        let width = world.pistons.iter().map(|p| p.width).fold(f64::INFINITY, f64::min);
        let mean_volume = mean_gap * width;
        trace.push((world.time, mean_volume));
        if let Some(prev) = prev_mean {
            if (mean_gap - prev).abs() / settle.window < settle.velocity_threshold {
                let p = world.pressure_since(&probe)?;
                return Ok((mean_volume, p.pressure));
            }
        }
        prev_mean = Some(mean_gap);
        if world.time - t_start >= settle.max_time {
            return Err(Error::NotSettled {
                max_time: settle.max_time,
                trace,
            });
        }
    }
}
