//! Scale and index of symmetric stable samples from the empirical characteristic function.
//!
//! For SαS data `−log|φ(θ)| = σ^α|θ|^α`, so `log(−log|φ̂(θ)|)` is linear in
//! `log θ` with slope `α` and intercept `α log σ`. A Gaussian `N(0, s²)` has
//! `α = 2` and `σ = s/√2` in this parametrization.

use super::stats::{median, ols, LineFit};
use crate::error::{Error, Result};

/// Number of frequencies in the fitted decade.
const N_THETA: usize = 16;
const DECADE: (f64, f64) = (0.15, 1.5);
const KEEP: (f64, f64) = (0.05, 0.98);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcfFit {
    pub scale: f64,
    pub alpha: f64,
    pub fit: LineFit,
    pub n_samples: usize,
}

/// `|n⁻¹ Σ e^{iθx}|`.
pub fn ecf_modulus(samples: &[f64], theta: f64) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for &x in samples {
        let (sn, cs) = (theta * x).sin_cos();
        c += cs;
        s += sn;
    }
    let n = samples.len() as f64;
    (c * c + s * s).sqrt() / n
}

/// Real part of the empirical characteristic function.
pub fn ecf_real(samples: &[f64], theta: f64) -> f64 {
    samples.iter().map(|x| (theta * x).cos()).sum::<f64>() / samples.len() as f64
}

fn median_abs(samples: &[f64]) -> f64 {
    median(&samples.iter().map(|x| x.abs()).collect::<Vec<_>>())
}

/// Log-spaced frequencies spanning a decade around `1/pilot`.
pub fn theta_grid(pilot: f64) -> Vec<f64> {
    let (lo, hi) = (DECADE.0 / pilot, DECADE.1 / pilot);
    (0..N_THETA)
        .map(|i| lo * (hi / lo).powf(i as f64 / (N_THETA - 1) as f64))
        .collect()
}

fn fit_once(samples: &[f64], pilot: f64) -> Result<EcfFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for th in theta_grid(pilot) {
        let m = ecf_modulus(samples, th);
        if m > KEEP.0 && m < KEEP.1 {
            lx.push(th.ln());
            ly.push((-m.ln()).ln());
        }
    }
    if lx.len() < 3 {
        return Err(Error::Numeric(format!(
            "degenerate data: only {} usable characteristic-function points",
            lx.len()
        )));
    }
    let fit = ols(&lx, &ly)?;
    let alpha = fit.slope;
    if !(alpha > 0.0) {
        return Err(Error::Numeric(format!("degenerate data: fitted index {alpha}")));
    }
    Ok(EcfFit { scale: (fit.intercept / alpha).exp(), alpha, fit, n_samples: samples.len() })
}

/// Fits `(σ, α)`; a first pass uses the median absolute value as pilot scale,
/// a second pass re-centres the frequency decade on the fitted scale.
pub fn ecf_scale_alpha(samples: &[f64]) -> Result<EcfFit> {
    if samples.len() < 100 {
        return Err(Error::Parameter(format!(
            "scale estimation needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite samples".into()));
    }
    let pilot = median_abs(samples);
    if pilot <= 0.0 {
        return Err(Error::Numeric("degenerate data: samples are (mostly) zero".into()));
    }
    let first = fit_once(samples, pilot)?;
    fit_once(samples, first.scale).or(Ok(first))
}

/// `sup_θ |φ̂_a(θ) − φ̂_b(θ)|` over the fitting decade of `a`, using real parts.
pub fn ecf_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let pilot = median_abs(a);
    if pilot <= 0.0 {
        return Err(Error::Numeric("degenerate data: samples are (mostly) zero".into()));
    }
    Ok(theta_grid(pilot)
        .into_iter()
        .map(|th| (ecf_real(a, th) - ecf_real(b, th)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::stable_cms;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn recovers_stable_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..10_000).map(|_| stable_cms(1.5, &mut rng)).collect();
        let f = ecf_scale_alpha(&x).unwrap();
        assert!((f.alpha - 1.5).abs() < 0.1, "{f:?}");
        assert!((f.scale - 1.0).abs() < 0.1, "{f:?}");
    }

    #[test]
    fn gaussian_has_index_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..10_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                3.0 * z
            })
            .collect();
        let f = ecf_scale_alpha(&x).unwrap();
        assert!((f.alpha - 2.0).abs() < 0.1, "{f:?}");
        assert!((f.scale - 3.0 / 2f64.sqrt()).abs() < 0.1, "{f:?}");
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..2000).map(|_| stable_cms(1.2, &mut rng)).collect();
        let a = ecf_scale_alpha(&x).unwrap();
        let y: Vec<f64> = x.iter().map(|v| 8.0 * v).collect();
        let b = ecf_scale_alpha(&y).unwrap();
        assert!((b.scale - 8.0 * a.scale).abs() < 1e-9 * b.scale);
        assert!((b.alpha - a.alpha).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(ecf_scale_alpha(&[0.0; 500]), Err(Error::Numeric(_))));
        assert!(matches!(ecf_scale_alpha(&[1.0; 50]), Err(Error::Parameter(_))));
    }
}
