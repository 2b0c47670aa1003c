use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-sample Kolmogorov–Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub d: f64,
    pub p: f64,
    pub n: usize,
}

const SERIES_TERMS: usize = 100;

/// `P(K > λ)` for the Kolmogorov distribution, from the alternating series
/// `2 Σ (-1)^(k-1) exp(-2k²λ²)` truncated at 100 terms.
///
/// Accurate for the sample sizes this crate targets (n ≥ 50); no
/// small-sample correction is applied.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let l2 = lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=SERIES_TERMS {
        let kf = k as f64;
        sum += sign * (-2.0 * kf * kf * l2).exp();
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Sup distance between the empirical CDF of `samples` and `cdf`, checking
/// both sides of every step.
pub fn ks_statistic<F>(samples: &[f64], cdf: F) -> Result<KsReport>
where
    F: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite("sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let below = f - i as f64 / n;
        let above = (i + 1) as f64 / n - f;
        d = d.max(below).max(above);
    }
    let d = d.clamp(0.0, 1.0);
    Ok(KsReport {
        d,
        p: kolmogorov_survival(n.sqrt() * d),
        n: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn quantile_sample_has_minimal_distance() {
        let n = 1000;
        // uniform quantiles (i - 0.5)/n against the uniform CDF
        let xs: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        let r = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.d - 0.0005).abs() < 1e-12, "{}", r.d);
        assert_eq!(r.n, n);
    }

    #[test]
    fn exponential_quantiles() {
        let n = 1000;
        let xs: Vec<f64> = (1..=n)
            .map(|i| -(1.0 - (i as f64 - 0.5) / n as f64).ln() * 3.0)
            .collect();
        let r = ks_statistic(&xs, |x| 1.0 - (-x / 3.0).exp()).unwrap();
        assert!((r.d - 0.0005).abs() < 1e-9);
    }

    #[test]
    fn seeded_uniform_sample_is_accepted() {
        let mut rng = RngStream::root(20_240_601);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
        let r = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.p > 0.01, "{r:?}");
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(matches!(ks_statistic(&[], |x| x), Err(Error::EmptySample)));
    }

    #[test]
    fn survival_function_reference_values() {
        // classical critical values of the Kolmogorov distribution
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 2e-4);
        assert!((kolmogorov_survival(1.2238) - 0.10).abs() < 1e-3);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(0.2) > 0.999);
        assert!(kolmogorov_survival(10.0) < 1e-30);
    }

    #[test]
    fn shifted_sample_is_rejected() {
        let mut rng = RngStream::root(5);
        let xs: Vec<f64> = (0..2000).map(|_| 0.1 + 0.9 * rng.uniform()).collect();
        let r = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.p < 1e-6);
        // population distance is 0.1, attained at x = 0.1
        assert!((r.d - 0.1).abs() < 0.04, "{}", r.d);
    }
}
