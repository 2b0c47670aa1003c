use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Vec2;

/// Finite-difference kinematics of a sampled trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    /// Forward differences `|p[i+1] - p[i]| / dt`, length `n - 1`.
    pub speeds: Vec<f64>,
    /// Wrapped heading change between consecutive segments over `dt`,
    /// length `n - 2`. A zero-length segment inherits the previous heading.
    pub steering_rates: Vec<f64>,
}

pub fn kinematics_from_trajectory(positions: &[Vec2], dt: f64) -> Result<Kinematics> {
    if positions.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: positions.len(),
        });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("{dt} must be > 0")));
    }
    if positions.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("position"));
    }
    let steps: Vec<Vec2> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    let speeds = steps.iter().map(|s| s.norm() / dt).collect();

    let mut headings = Vec::with_capacity(steps.len());
    let mut last = steps.iter().find_map(|s| s.angle()).unwrap_or_default();
    for s in &steps {
        if let Some(a) = s.angle() {
            last = a;
        }
        headings.push(last);
    }
    let steering_rates = headings
        .windows(2)
        .map(|w| w[0].delta_to(w[1]) / dt)
        .collect();
    Ok(Kinematics {
        speeds,
        steering_rates,
    })
}
