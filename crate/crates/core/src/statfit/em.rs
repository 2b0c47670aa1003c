use crate::error::{Error, Result};
use crate::maxent::MixtureParams;
use crate::units::EnergyTemp;

use super::{FitParams, FitResult};

/// Temperatures are floored at this fraction of the sample mean.
const COLLAPSE_FLOOR: f64 = 1e-9;

fn check_energies(samples: &[f64], need: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.len() < need {
        return Err(Error::TooFewSamples {
            need,
            got: samples.len(),
        });
    }
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::NonFinite("sample"));
        }
        if x < 0.0 {
            return Err(Error::invalid("samples", format!("negative energy {x}")));
        }
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Maximum-likelihood single exponential: `kT` is the sample mean.
pub fn fit_exponential(samples: &[f64]) -> Result<FitResult> {
    let mean = check_energies(samples, 2)?;
    let kt = EnergyTemp::new(mean)?;
    let n = samples.len() as f64;
    Ok(FitResult {
        params: FitParams::Exp1 { kt },
        loglik: -n * (1.0 + mean.ln()),
        iterations: 0,
        converged: true,
        degenerate: false,
    })
}

/// Per-iteration log-likelihoods of an EM run.
#[derive(Debug, Clone, Default)]
pub struct EmTrace {
    pub loglik: Vec<f64>,
}

/// Two-component exponential mixture by expectation–maximization.
///
/// Stops when the log-likelihood gain of an iteration falls below `tol` or
/// after `max_iter` iterations; the latter returns `converged = false`. The
/// result is reported in canonical order (`t1 ≤ t2`).
pub fn fit_mixture2(
    samples: &[f64],
    init: MixtureParams,
    tol: f64,
    max_iter: usize,
) -> Result<FitResult> {
    fit_mixture2_traced(samples, init, tol, max_iter).map(|(r, _)| r)
}

struct Estep {
    loglik: f64,
    /// Σ r, Σ r·x, Σ (1-r)·x over the sample.
    w1: f64,
    w1x: f64,
    w2x: f64,
}

fn log_density(log_w: f64, kt: f64, x: f64) -> f64 {
    log_w - kt.ln() - x / kt
}

fn estep(samples: &[f64], phi: f64, k1: f64, k2: f64) -> Estep {
    let (lw1, lw2) = (phi.ln(), (1.0 - phi).ln());
    let mut out = Estep {
        loglik: 0.0,
        w1: 0.0,
        w1x: 0.0,
        w2x: 0.0,
    };
    for &x in samples {
        let a = log_density(lw1, k1, x);
        let b = log_density(lw2, k2, x);
        let m = a.max(b);
        let (ea, eb) = ((a - m).exp(), (b - m).exp());
        let s = ea + eb;
        out.loglik += m + s.ln();
        let r = ea / s;
        out.w1 += r;
        out.w1x += r * x;
        out.w2x += (1.0 - r) * x;
    }
    out
}

pub fn fit_mixture2_traced(
    samples: &[f64],
    init: MixtureParams,
    tol: f64,
    max_iter: usize,
) -> Result<(FitResult, EmTrace)> {
    let mean = check_energies(samples, 10)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("{tol} must be > 0")));
    }
    init.t1.checked()?;
    init.t2.checked()?;
    if !(0.0..=1.0).contains(&init.phi) {
        return Err(Error::invalid("phi", "outside [0, 1]"));
    }
    let n = samples.len() as f64;
    let floor = COLLAPSE_FLOOR * mean.max(f64::MIN_POSITIVE);

    let (mut phi, mut k1, mut k2) = (init.phi, init.t1.kt(), init.t2.kt());
    let mut trace = EmTrace::default();
    let mut degenerate = false;
    let mut converged = false;
    let mut iterations = 0;

    let mut e = estep(samples, phi, k1, k2);
    trace.loglik.push(e.loglik);
    while iterations < max_iter {
        iterations += 1;
        let w2 = n - e.w1;
        phi = (e.w1 / n).clamp(0.0, 1.0);
        if e.w1 > 0.0 {
            k1 = e.w1x / e.w1;
        }
        if w2 > 0.0 {
            k2 = e.w2x / w2;
        }
        if k1 < floor {
            k1 = floor;
            degenerate = true;
        }
        if k2 < floor {
            k2 = floor;
            degenerate = true;
        }
        let next = estep(samples, phi, k1, k2);
        let gain = next.loglik - e.loglik;
        e = next;
        trace.loglik.push(e.loglik);
        if gain < tol {
            converged = true;
            break;
        }
    }

    let params = MixtureParams::new(phi, k1, k2)?;
    Ok((
        FitResult {
            params: FitParams::Exp2Mix(params),
            loglik: e.loglik,
            iterations,
            converged: converged && !degenerate,
            degenerate,
        },
        trace,
    ))
}
