//! Exponential-in-energy action distributions.
//!
//! Every sampler here is the maximum-entropy density for a fixed mean:
//! `p(x) = (1/kT) exp(-x/kT)` on `[0, ∞)`. Speeds are obtained by drawing an
//! energy and inverting `E = v²/2`; steering rates draw an exponential
//! magnitude whose temperature depends on speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::units::{deg_to_rad, wrap_angle, Angle, EnergyTemp};
use rand_distr::{Distribution, StandardNormal};

/// Density of the exponential energy law.
pub fn exp_pdf(x: f64, t: EnergyTemp) -> Result<f64> {
    let kt = t.checked()?;
    Ok(if x >= 0.0 { (-x / kt).exp() / kt } else { 0.0 })
}

/// Cumulative distribution of the exponential energy law.
pub fn exp_cdf(x: f64, t: EnergyTemp) -> Result<f64> {
    let kt = t.checked()?;
    Ok(if x >= 0.0 { -(-x / kt).exp_m1() } else { 0.0 })
}

/// Draws an energy from `Exp(mean kT)` by inversion.
pub fn sample_energy(t: EnergyTemp, rng: &mut RngStream) -> Result<f64> {
    let kt = t.checked()?;
    Ok(-kt * rng.uniform_open0().ln())
}

/// Inverts `E = v²/2` for a unit-mass agent.
pub fn speed_from_energy(e: f64) -> Result<f64> {
    if !e.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    if e < 0.0 {
        return Err(Error::invalid("energy", format!("{e} < 0")));
    }
    Ok((2.0 * e).sqrt())
}

/// How a speed is drawn from a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedLaw {
    /// `E ~ Exp(mean kT)`, `v = sqrt(2E)`.
    #[default]
    ExponentialEnergy,
    /// `p(v) ∝ exp(-v²/(2kT))` on `v ≥ 0`, i.e. `|N(0, kT)|`.
    HalfGaussian,
}

/// Draws a speed with the default exponential-in-energy law.
pub fn sample_speed(t: EnergyTemp, rng: &mut RngStream) -> Result<f64> {
    sample_speed_with(SpeedLaw::ExponentialEnergy, t, rng)
}

pub fn sample_speed_with(law: SpeedLaw, t: EnergyTemp, rng: &mut RngStream) -> Result<f64> {
    match law {
        SpeedLaw::ExponentialEnergy => speed_from_energy(sample_energy(t, rng)?),
        SpeedLaw::HalfGaussian => {
            let kt = t.checked()?;
            let z: f64 = StandardNormal.sample(rng);
            Ok(z.abs() * kt.sqrt())
        }
    }
}

/// Two-component exponential energy mixture:
/// `φ Exp(mean t1) + (1-φ) Exp(mean t2)` with `t1 ≤ t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub phi: f64,
    pub t1: EnergyTemp,
    pub t2: EnergyTemp,
}

impl MixtureParams {
    /// Validates and stores the components in canonical order (`t1 ≤ t2`),
    /// swapping the weight along with the temperatures if needed.
    pub fn new(phi: f64, t1: f64, t2: f64) -> Result<MixtureParams> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::invalid("phi", format!("{phi} outside [0, 1]")));
        }
        let (a, b) = (EnergyTemp::new(t1)?, EnergyTemp::new(t2)?);
        Ok(if t1 <= t2 {
            MixtureParams { phi, t1: a, t2: b }
        } else {
            MixtureParams {
                phi: 1.0 - phi,
                t1: b,
                t2: a,
            }
        })
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(Error::invalid("phi", format!("{} outside [0, 1]", self.phi)));
        }
        self.t1.checked()?;
        self.t2.checked()?;
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.phi * self.t1.kt() + (1.0 - self.phi) * self.t2.kt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let (k1, k2) = (self.t1.kt(), self.t2.kt());
        self.phi * (-x / k1).exp() / k1 + (1.0 - self.phi) * (-x / k2).exp() / k2
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (k1, k2) = (self.t1.kt(), self.t2.kt());
        -(self.phi * (-x / k1).exp_m1() + (1.0 - self.phi) * (-x / k2).exp_m1())
    }
}

pub fn sample_mixture_energy(p: &MixtureParams, rng: &mut RngStream) -> Result<f64> {
    p.validate()?;
    let t = if rng.uniform() < p.phi { p.t1 } else { p.t2 };
    sample_energy(t, rng)
}

/// Speed-conditioned steering temperature, piecewise linear in speed and
/// clamped outside the knot range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct SteeringTempFn {
    knots: Vec<(f64, f64)>,
}

impl SteeringTempFn {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<SteeringTempFn> {
        if knots.is_empty() {
            return Err(Error::invalid("knots", "at least one (speed, kT) knot required"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("knots", "speeds must be strictly increasing"));
            }
        }
        for &(v, kt) in &knots {
            if !v.is_finite() {
                return Err(Error::NonFinite("knot speed"));
            }
            EnergyTemp::new(kt)?;
        }
        Ok(SteeringTempFn { knots })
    }

    pub fn constant(t: EnergyTemp) -> Result<SteeringTempFn> {
        SteeringTempFn::new(vec![(0.0, t.checked()?)])
    }

    /// Decreasing profile with knots at the speeds of the ant energy levels
    /// 4.5, 10, 18, 28, 40, 54, 71 and 90 (speed = sqrt(2E)). The
    /// temperatures reproduce the trend only: wide steering at low speed,
    /// narrow at high speed.
    pub fn ant_decreasing() -> SteeringTempFn {
        let energies = [4.5, 10.0, 18.0, 28.0, 40.0, 54.0, 71.0, 90.0];
        let temps = [1.0, 0.8, 0.65, 0.5, 0.4, 0.32, 0.26, 0.2];
        let knots = energies
            .iter()
            .zip(temps)
            .map(|(&e, kt)| ((2.0f64 * e).sqrt(), kt))
            .collect();
        SteeringTempFn { knots }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, speed: f64) -> EnergyTemp {
        let k = &self.knots;
        let kt = if speed <= k[0].0 {
            k[0].1
        } else if speed >= k[k.len() - 1].0 {
            k[k.len() - 1].1
        } else {
            let i = k.partition_point(|&(v, _)| v <= speed);
            let (v0, t0) = k[i - 1];
            let (v1, t1) = k[i];
            t0 + (t1 - t0) * (speed - v0) / (v1 - v0)
        };
        EnergyTemp(kt)
    }
}

impl TryFrom<Vec<(f64, f64)>> for SteeringTempFn {
    type Error = Error;
    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        SteeringTempFn::new(knots)
    }
}

impl From<SteeringTempFn> for Vec<(f64, f64)> {
    fn from(f: SteeringTempFn) -> Self {
        f.knots
    }
}

/// Signed steering-angle rate (rad/s): exponential magnitude with mean
/// `kT_θ(v)`, sign uniform.
pub fn sample_steering_rate(speed: f64, f: &SteeringTempFn, rng: &mut RngStream) -> Result<f64> {
    if !speed.is_finite() {
        return Err(Error::NonFinite("speed"));
    }
    if speed < 0.0 {
        return Err(Error::invalid("speed", format!("{speed} < 0")));
    }
    let magnitude = sample_energy(f.eval(speed), rng)?;
    Ok(if rng.next_bool() { magnitude } else { -magnitude })
}

/// Wrapped-normal heading around `mean` with standard deviation `sigma_deg`.
pub fn sample_heading_normal(mean: Angle, sigma_deg: f64, rng: &mut RngStream) -> Result<Angle> {
    if !(sigma_deg > 0.0) || !sigma_deg.is_finite() {
        return Err(Error::invalid("sigma", format!("{sigma_deg} must be > 0")));
    }
    let z: f64 = StandardNormal.sample(rng);
    wrap_angle(mean.radians() + deg_to_rad(sigma_deg) * z)
}

/// Uniform heading on `[lo, hi)` (radians, unwrapped), returned wrapped.
pub fn sample_heading_uniform(lo: f64, hi: f64, rng: &mut RngStream) -> Result<Angle> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::NonFinite("heading bound"));
    }
    if lo >= hi {
        return Err(Error::invalid("heading interval", format!("[{lo}, {hi}) is empty")));
    }
    wrap_angle(lo + (hi - lo) * rng.uniform())
}

impl RngStream {
    pub(crate) fn next_bool(&mut self) -> bool {
        use rand::RngCore;
        self.next_u32() & 1 == 1
    }
}
