//! Geometric and unit types shared by every module.
//!
//! Lengths are millimetres, times seconds, angles radians. Degrees appear
//! only at configuration boundaries and are converted once via
//! [`deg_to_rad`]. Agent mass is fixed to 1, so kinetic energy is `v²/2`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2D vector in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector pointing along `a`.
    pub fn from_angle(a: Angle) -> Self {
        let (s, c) = a.radians().sin_cos();
        Vec2 { x: c, y: s }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Direction of the vector; `None` for the zero vector.
    pub fn angle(self) -> Option<Angle> {
        if self.x == 0.0 && self.y == 0.0 {
            None
        } else {
            Some(Angle::from_wrapped(self.y.atan2(self.x)))
        }
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }

    pub fn rotated(self, a: Angle) -> Vec2 {
        let (s, c) = a.radians().sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// An angle in radians, stored canonically in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const HALF_TURN: Angle = Angle(PI);

    /// Wraps a finite value. Callers must guarantee finiteness; use
    /// [`wrap_angle`] for unchecked input.
    pub(crate) fn from_wrapped(a: f64) -> Angle {
        debug_assert!(a.is_finite());
        Angle(wrap_raw(a))
    }

    pub fn from_degrees(deg: f64) -> Result<Angle> {
        wrap_angle(deg_to_rad(deg))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// `self + delta`, wrapped.
    pub fn offset(self, delta: f64) -> Angle {
        Angle::from_wrapped(self.0 + delta)
    }

    /// Signed shortest rotation from `self` to `other`, in `(-π, π]`.
    pub fn delta_to(self, other: Angle) -> f64 {
        wrap_raw(other.0 - self.0)
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;
    fn try_from(a: f64) -> Result<Angle> {
        wrap_angle(a)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

fn wrap_raw(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Wraps `a` into the canonical interval `(-π, π]`.
pub fn wrap_angle(a: f64) -> Result<Angle> {
    if !a.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(Angle(wrap_raw(a)))
}

pub fn deg_to_rad(deg: f64) -> f64 {
    deg * (PI / 180.0)
}

/// A behavioural temperature `kT` in energy units (mm²/s² at unit mass).
///
/// `kT > 0` for every sampler; `kT == 0` is only representable through
/// [`EnergyTemp::degenerate`] and is rejected wherever a distribution is
/// built from it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EnergyTemp(pub(crate) f64);

impl EnergyTemp {
    pub fn new(kt: f64) -> Result<EnergyTemp> {
        if kt.is_finite() && kt > 0.0 {
            Ok(EnergyTemp(kt))
        } else {
            Err(Error::DegenerateTemperature(kt))
        }
    }

    /// The explicit zero-temperature marker.
    pub const fn degenerate() -> EnergyTemp {
        EnergyTemp(0.0)
    }

    pub fn kt(self) -> f64 {
        self.0
    }

    pub fn is_degenerate(self) -> bool {
        self.0 <= 0.0
    }

    /// Fails with [`Error::DegenerateTemperature`] unless `kT > 0`.
    pub fn checked(self) -> Result<f64> {
        if self.0 > 0.0 {
            Ok(self.0)
        } else {
            Err(Error::DegenerateTemperature(self.0))
        }
    }
}

impl TryFrom<f64> for EnergyTemp {
    type Error = Error;
    fn try_from(kt: f64) -> Result<EnergyTemp> {
        if kt == 0.0 {
            Ok(EnergyTemp::degenerate())
        } else {
            EnergyTemp::new(kt)
        }
    }
}

impl From<EnergyTemp> for f64 {
    fn from(t: EnergyTemp) -> f64 {
        t.0
    }
}

/// Kinetic energy of a unit-mass agent.
pub fn kinetic_energy(speed: f64) -> f64 {
    0.5 * speed * speed
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap().radians(), 0.0);
        assert!((wrap_angle(3.0 * PI).unwrap().radians() - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(-PI).unwrap().radians(), PI);
        assert_eq!(wrap_angle(PI).unwrap().radians(), PI);
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn delta_is_shortest_rotation() {
        let a = Angle::from_degrees(170.0).unwrap();
        let b = Angle::from_degrees(-170.0).unwrap();
        assert!((a.delta_to(b).to_degrees() - 20.0).abs() < 1e-9);
        assert!((b.delta_to(a).to_degrees() + 20.0).abs() < 1e-9);
    }

    #[test]
    fn temperature_rejects_non_positive() {
        assert!(EnergyTemp::new(0.0).is_err());
        assert!(EnergyTemp::new(-1.0).is_err());
        assert!(EnergyTemp::degenerate().checked().is_err());
        assert_eq!(EnergyTemp::new(2.5).unwrap().kt(), 2.5);
    }

    proptest! {
        #[test]
        fn wrap_is_canonical_and_idempotent(a in -1e6f64..1e6) {
            let w = wrap_angle(a).unwrap().radians();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w).unwrap().radians(), w);
        }

        #[test]
        fn wrap_is_periodic(a in -1e3f64..1e3, n in -50i32..50) {
            let w0 = wrap_angle(a).unwrap();
            let wn = wrap_angle(a + TAU * n as f64).unwrap();
            // equal up to float error, modulo the (-π, π] seam
            prop_assert!(w0.delta_to(wn).abs() < 1e-9);
        }
    }
}
