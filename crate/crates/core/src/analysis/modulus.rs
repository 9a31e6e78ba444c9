//! Empirical modulus of continuity at dyadic lags.
//!
//! For each lag `h_n = 2^{-n}` the largest increment `M_n = max_i |X(t_i + h_n) − X(t_i)|`
//! is taken per path and then pooled over the ensemble by a maximum. The
//! log-exponent `γ̂` is the slope of `log(M_n / h_n^H)` against `log log(1/h_n)`.
//! The same fit on the median over paths of `log M_n` is reported alongside; it
//! is not used by the verdicts.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use super::ecf::ecf_scale_alpha;
use super::stats::{median, ols, LineFit};
use super::Verdict;
use crate::error::{param, Error, Result};

/// Minimum number of dyadic lags in a fit.
pub const MIN_LAGS: usize = 8;
/// Minimum pooled number of disjoint increments at every lag.
pub const MIN_DISJOINT: usize = 64;

/// Result of [`modulus_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReport {
    pub levels: Vec<u32>,
    /// `h_n = 2^{-n}`, strictly decreasing.
    pub lags: Vec<f64>,
    /// Ensemble-pooled `M_n`.
    pub sup_increments: Vec<f64>,
    /// Median over paths of the per-path `M_n`.
    pub median_sup_increments: Vec<f64>,
    pub gamma_fit: LineFit,
    /// Log-exponent fit on `median_sup_increments`.
    pub median_gamma_fit: LineFit,
    /// Slope of `log M_n` against `log h_n`.
    pub hurst_fit: LineFit,
    /// ECF index estimate from the increments at the coarsest lag, when enough paths exist.
    pub alpha_hat: Option<f64>,
    pub n_paths: usize,
    pub verdicts: Vec<Verdict>,
}

impl ModulusReport {
    pub fn gamma_hat(&self) -> f64 {
        self.gamma_fit.slope
    }

    pub fn hurst_hat(&self) -> f64 {
        self.hurst_fit.slope
    }
}

/// `max_i |x[i + lag] − x[i]|`.
pub fn max_increment(path: &[f64], lag: usize) -> f64 {
    path.iter()
        .zip(&path[lag.min(path.len())..])
        .map(|(a, b)| (b - a).abs())
        .fold(0.0, f64::max)
}

/// Computes the profile and the verdicts of the log-exponent laws for index `alpha`.
pub fn modulus_profile(
    paths: &[Vec<f64>],
    dt: f64,
    hurst: f64,
    alpha: f64,
    n_range: RangeInclusive<u32>,
) -> Result<ModulusReport> {
    if paths.is_empty() {
        return param("modulus profile needs at least one path");
    }
    let len = paths[0].len();
    if paths.iter().any(|p| p.len() != len) {
        return param("paths have different lengths");
    }
    let levels: Vec<u32> = n_range.collect();
    if levels.len() < MIN_LAGS {
        return param(format!(
            "modulus fit needs at least {MIN_LAGS} dyadic lags, got {}",
            levels.len()
        ));
    }
    let span = (len - 1) as f64 * dt;
    let mut steps = Vec::with_capacity(levels.len());
    for &n in &levels {
        let h = 2f64.powi(-(n as i32));
        let steps_f = h / dt;
        if steps_f < 1.0 || steps_f.fract() != 0.0 {
            return param(format!("lag 2^-{n} is not a positive multiple of the step {dt}"));
        }
        let disjoint = (span / h).floor() as usize * paths.len();
        if disjoint < MIN_DISJOINT {
            return param(format!(
                "lag 2^-{n} has only {disjoint} disjoint increments in the ensemble; need {MIN_DISJOINT}"
            ));
        }
        steps.push(steps_f as usize);
    }
    let per_path: Vec<Vec<f64>> = steps
        .iter()
        .map(|&s| paths.par_iter().map(|p| max_increment(p, s)).collect())
        .collect();
    let sup_increments: Vec<f64> = per_path.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
    let median_sup_increments: Vec<f64> = per_path.iter().map(|r| median(r)).collect();
    if let Some(i) = sup_increments.iter().position(|m| !(*m > 0.0) || !m.is_finite()) {
        return Err(Error::Numeric(format!(
            "degenerate ensemble: pooled increment at lag 2^-{} is {}",
            levels[i], sup_increments[i]
        )));
    }
    let lags: Vec<f64> = levels.iter().map(|&n| 2f64.powi(-(n as i32))).collect();
    let x: Vec<f64> = lags.iter().map(|h| (1.0 / h).ln().ln()).collect();
    let normalized = |m: &[f64]| -> Vec<f64> {
        lags.iter().zip(m).map(|(h, m)| (m / h.powf(hurst)).ln()).collect()
    };
    let gamma_fit = ols(&x, &normalized(&sup_increments))?;
    let median_gamma_fit = if median_sup_increments.iter().all(|m| *m > 0.0) {
        ols(&x, &normalized(&median_sup_increments))?
    } else {
        LineFit { slope: f64::NAN, intercept: f64::NAN, slope_stderr: f64::NAN, intercept_stderr: f64::NAN, dof: gamma_fit.dof }
    };
    let log_h: Vec<f64> = lags.iter().map(|h| h.ln()).collect();
    let log_m: Vec<f64> = sup_increments.iter().map(|m| m.ln()).collect();
    let hurst_fit = ols(&log_h, &log_m)?;
    let alpha_hat = if paths.len() >= 100 {
        let s = steps[0];
        let inc: Vec<f64> = paths.iter().map(|p| p[s] - p[0]).collect();
        ecf_scale_alpha(&inc).ok().map(|f| f.alpha)
    } else {
        None
    };
    let g = gamma_fit.slope;
    let se = gamma_fit.slope_stderr;
    let target = 1.0 / alpha;
    let verdicts = vec![
        Verdict::check("modulus_log_exponent", target, g, se, (target - 0.3, target + 0.4)),
        Verdict::check(
            "below_older_log_exponent",
            target + 0.5,
            g,
            se,
            (f64::NEG_INFINITY, target + 0.4),
        ),
    ];
    Ok(ModulusReport {
        levels,
        lags,
        sup_increments,
        median_sup_increments,
        gamma_fit,
        median_gamma_fit,
        hurst_fit,
        alpha_hat,
        n_paths: paths.len(),
        verdicts,
    })
}

/// Unique `j₀ ≥ 0` with `2^{-j₀-1}(2ρ̃) < |t₁ − t₂| ≤ 2^{-j₀}(2ρ̃)`.
pub fn dyadic_scale_j0(t1: f64, t2: f64, rho_tilde: f64) -> Result<u32> {
    let d = (t1 - t2).abs();
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Domain(format!("j0 needs two distinct finite times, got {t1}, {t2}")));
    }
    let w = 2.0 * rho_tilde;
    if !(w > 0.0) || d > w {
        return Err(Error::Domain(format!(
            "|t1 - t2| = {d} exceeds the window 2ρ̃ = {w}"
        )));
    }
    let mut j = (w / d).log2().floor().max(0.0) as i32;
    // exact powers of two make the sandwich test itself exact
    while j > 0 && w * 2f64.powi(-j) < d {
        j -= 1;
    }
    while w * 2f64.powi(-j - 1) >= d {
        j += 1;
    }
    Ok(j as u32)
}
