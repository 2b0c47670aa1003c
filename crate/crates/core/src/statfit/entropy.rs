//! Numerical check that the exponential law maximizes entropy at fixed mean.
//!
//! On a uniform grid `x_j = j·h`, `j = 0..=M`, the maximum-entropy
//! distribution with prescribed mean is the discrete Gibbs law
//! `p_j ∝ exp(-β x_j)`, the discretized exponential. Random distributions
//! with the same mean are built by exponentially tilting random base
//! weights; none of them may exceed the Gibbs entropy.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::units::EnergyTemp;

/// Allowed numerical excess (nats) before a trial counts as a violation.
pub const DISCRETIZATION_SLACK: f64 = 1e-3;

/// Differential entropy of `Exp(mean kT)` in nats (k = 1): `1 + ln kT`.
pub fn entropy_exponential(t: EnergyTemp) -> Result<f64> {
    Ok(1.0 + t.checked()?.ln())
}

/// Shannon entropy (nats) of a discrete distribution.
pub fn discrete_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&q| q > 0.0).map(|&q| q * q.ln()).sum::<f64>()
}

/// Uniform support `{0, h, 2h, ..., x_max}` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn nodes(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.x_max];
        }
        let h = self.x_max / (self.points - 1) as f64;
        (0..self.points).map(|j| j as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DominanceReport {
    pub mean: f64,
    /// Entropy of the discretized exponential on the grid.
    pub reference_entropy: f64,
    pub max_trial_entropy: f64,
    /// `max(H_trial - H_reference)`; ≤ 0 up to rounding.
    pub max_violation: f64,
    pub violations: usize,
    pub trials: usize,
    pub slack: f64,
}

/// Tilts `log_base` by `exp(-β x)` so that the mean over `xs` equals
/// `target`; returns the normalized distribution.
fn tilt_to_mean(log_base: &[f64], xs: &[f64], target: f64) -> Vec<f64> {
    let scale = xs.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let weights = |beta: f64| -> Vec<f64> {
        let logs: Vec<f64> = log_base.iter().zip(xs).map(|(lb, x)| lb - beta * x / scale).collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    };
    let mean_of = |p: &[f64]| p.iter().zip(xs).map(|(q, x)| q * x).sum::<f64>();
    // mean is decreasing in β
    let (mut lo, mut hi) = (-1.0, 1.0);
    while mean_of(&weights(lo)) < target && lo > -1e6 {
        lo *= 2.0;
    }
    while mean_of(&weights(hi)) > target && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_of(&weights(mid)) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    weights(0.5 * (lo + hi))
}

/// Discrete Gibbs (maximum-entropy) distribution on the grid for `mean`.
pub fn gibbs_on_grid(mean: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    let xs = validate(mean, grid)?;
    if xs.len() == 1 {
        return Ok(vec![1.0]);
    }
    Ok(tilt_to_mean(&vec![0.0; xs.len()], &xs, mean))
}

fn validate(mean: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::invalid("mean", format!("{mean} must be > 0")));
    }
    if grid.points == 0 || !(grid.x_max > 0.0) {
        return Err(Error::invalid("grid", "needs at least one node and x_max > 0"));
    }
    if grid.points == 1 {
        if mean != grid.x_max {
            return Err(Error::invalid("mean", "single-node grid supports only its node"));
        }
    } else if mean >= grid.x_max {
        return Err(Error::invalid(
            "mean",
            format!("{mean} not inside the grid support [0, {})", grid.x_max),
        ));
    }
    Ok(grid.nodes())
}

/// Checks `trials` random same-mean distributions against the Gibbs entropy.
pub fn maxent_dominance(
    mean: f64,
    grid: &GridSpec,
    trials: usize,
    rng: &mut RngStream,
) -> Result<DominanceReport> {
    let xs = validate(mean, grid)?;
    let reference = gibbs_on_grid(mean, grid)?;
    let reference_entropy = discrete_entropy(&reference);

    let mut max_trial_entropy = f64::NEG_INFINITY;
    let mut violations = 0;
    for trial in 0..trials {
        let p = if xs.len() == 1 {
            vec![1.0]
        } else {
            let mut stream = rng.split(trial as u64);
            // concentration spans very peaked to nearly flat base weights
            let alpha = 0.05 * 100f64.powf(stream.uniform());
            let gamma = Gamma::new(alpha, 1.0).expect("alpha > 0");
            let log_base: Vec<f64> = xs
                .iter()
                .map(|_| {
                    let g: f64 = gamma.sample(&mut stream);
                    g.max(1e-300).ln()
                })
                .collect();
            tilt_to_mean(&log_base, &xs, mean)
        };
        let h = discrete_entropy(&p);
        max_trial_entropy = max_trial_entropy.max(h);
        if h - reference_entropy > DISCRETIZATION_SLACK {
            violations += 1;
        }
    }
    Ok(DominanceReport {
        mean,
        reference_entropy,
        max_trial_entropy,
        max_violation: max_trial_entropy - reference_entropy,
        violations,
        trials,
        slack: DISCRETIZATION_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_entropy_examples() {
        assert_eq!(entropy_exponential(EnergyTemp::new(1.0).unwrap()).unwrap(), 1.0);
        let e = std::f64::consts::E;
        assert!((entropy_exponential(EnergyTemp::new(e).unwrap()).unwrap() - 2.0).abs() < 1e-15);
        assert!(entropy_exponential(EnergyTemp::degenerate()).is_err());
    }

    #[test]
    fn gibbs_has_requested_mean_and_decays() {
        let grid = GridSpec { x_max: 20.0, points: 201 };
        let p = gibbs_on_grid(2.0, &grid).unwrap();
        let xs = grid.nodes();
        let mean: f64 = p.iter().zip(&xs).map(|(q, x)| q * x).sum();
        assert!((mean - 2.0).abs() < 1e-9);
        assert!(p.windows(2).all(|w| w[1] < w[0]));
        // ratio of neighbours is constant: geometric law
        let r0 = p[1] / p[0];
        let r1 = p[101] / p[100];
        assert!((r0 - r1).abs() < 1e-9);
    }

    #[test]
    fn discretized_entropy_tracks_differential_entropy() {
        // untruncated geometric law on the same lattice with the same mean
        let grid = GridSpec { x_max: 40.0, points: 4001 };
        let p = gibbs_on_grid(2.0, &grid).unwrap();
        let h = discrete_entropy(&p);
        let dx: f64 = 40.0 / 4000.0;
        let q = 2.0 / (2.0 + dx);
        let exact = -(1.0 - q).ln() - q / (1.0 - q) * q.ln();
        assert!((h - exact).abs() < 1e-6, "{h} vs {exact}");
        // and H_discrete → h - ln(Δx) to first order in Δx
        let diff = entropy_exponential(EnergyTemp::new(2.0).unwrap()).unwrap() - dx.ln();
        assert!((h - diff).abs() < dx, "{h} vs {diff}");
    }

    #[test]
    fn no_violations_at_midpoint_mean() {
        let grid = GridSpec { x_max: 10.0, points: 101 };
        let mut rng = RngStream::root(41);
        let r = maxent_dominance(5.0, &grid, 200, &mut rng).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.max_violation <= DISCRETIZATION_SLACK);
        // midpoint mean on a symmetric grid gives the uniform law
        assert!((r.reference_entropy - (101f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        let grid = GridSpec { x_max: 3.0, points: 1 };
        let mut rng = RngStream::root(42);
        let r = maxent_dominance(3.0, &grid, 5, &mut rng).unwrap();
        assert_eq!(r.reference_entropy, 0.0);
        assert_eq!(r.max_trial_entropy, 0.0);
        assert_eq!(r.violations, 0);
        // and on a wider grid the point mass sits below the Gibbs entropy
        let wide = GridSpec { x_max: 10.0, points: 11 };
        let mut point = vec![0.0; 11];
        point[3] = 1.0;
        let reference = discrete_entropy(&gibbs_on_grid(3.0, &wide).unwrap());
        assert!(discrete_entropy(&point) == 0.0 && reference > 0.0);
    }

    #[test]
    fn infeasible_mean_is_an_error() {
        let grid = GridSpec { x_max: 10.0, points: 11 };
        let mut rng = RngStream::root(43);
        assert!(maxent_dominance(11.0, &grid, 1, &mut rng).is_err());
        assert!(maxent_dominance(0.0, &grid, 1, &mut rng).is_err());
    }
}
