//! Entropy-maximizing stochastic swarm control.
//!
//! Agents draw actions from maximum-entropy (exponential-in-energy) laws:
//! `E ~ Exp(mean kT)`, `v = sqrt(2E)`. The crate provides the samplers, the
//! fitting and goodness-of-fit tools used to analyze such data, a small 2D
//! physics world with pistons and a pushable payload, light sensing, the
//! per-robot controllers and the experiment harness built on top.

pub mod error;
pub mod experiments;
pub mod io;
pub mod maxent;
pub mod policies;
pub mod rng;
pub mod sensing;
pub mod statfit;
pub mod units;
pub mod world;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use units::{wrap_angle, Angle, EnergyTemp, Vec2};
