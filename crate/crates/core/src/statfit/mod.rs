//! Distribution fitting and goodness-of-fit on energy and kinematic data.

mod em;
mod entropy;
mod kinematics;
mod ks;

pub use em::{fit_exponential, fit_mixture2, fit_mixture2_traced, EmTrace};
pub use entropy::{
    discrete_entropy, entropy_exponential, gibbs_on_grid, maxent_dominance, DominanceReport,
    GridSpec, DISCRETIZATION_SLACK,
};
pub use kinematics::{kinematics_from_trajectory, Kinematics};
pub use ks::{kolmogorov_survival, ks_statistic, KsReport};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::maxent::MixtureParams;
use crate::units::EnergyTemp;

/// Fitted parameters for either model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FitParams {
    Exp1 { kt: EnergyTemp },
    Exp2Mix(MixtureParams),
}

impl FitParams {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            FitParams::Exp1 { kt } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / kt.kt()).exp_m1()
                }
            }
            FitParams::Exp2Mix(p) => p.cdf(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FitParams,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// A temperature hit the collapse floor during EM.
    pub degenerate: bool,
}

impl FitResult {
    pub fn ks(&self, samples: &[f64]) -> Result<KsReport> {
        ks_statistic(samples, |x| self.params.cdf(x))
    }
}

/// One-phase versus two-phase comparison on the same data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseComparison {
    pub one_phase: FitResult,
    pub one_phase_ks: KsReport,
    pub two_phase: FitResult,
    pub two_phase_ks: KsReport,
}

/// Smallest KS reduction that counts as evidence for a second phase.
pub const MIN_KS_IMPROVEMENT: f64 = 0.01;

impl PhaseComparison {
    /// Reduction of the KS statistic gained by the second component.
    pub fn ks_improvement(&self) -> f64 {
        self.one_phase_ks.d - self.two_phase_ks.d
    }

    pub fn prefers_two_phase(&self) -> bool {
        self.ks_improvement() >= MIN_KS_IMPROVEMENT
    }
}

/// Default EM initialization: `t1 = mean/2`, `t2 = 2·mean`, `φ = 1/2`.
pub fn default_mixture_init(samples: &[f64]) -> Result<MixtureParams> {
    let mean = samples.iter().sum::<f64>() / samples.len().max(1) as f64;
    MixtureParams::new(0.5, 0.5 * mean, 2.0 * mean)
}

/// Fits both models and reports their KS statistics.
pub fn compare_phases(samples: &[f64], tol: f64, max_iter: usize) -> Result<PhaseComparison> {
    let one_phase = fit_exponential(samples)?;
    let one_phase_ks = one_phase.ks(samples)?;
    let two_phase = fit_mixture2(samples, default_mixture_init(samples)?, tol, max_iter)?;
    let two_phase_ks = two_phase.ks(samples)?;
    Ok(PhaseComparison {
        one_phase,
        one_phase_ks,
        two_phase,
        two_phase_ks,
    })
}
