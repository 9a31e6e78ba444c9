//! Growth of the wavelet coefficients with the level and the binomial count bound.

use super::stats::{mean, ols, ols2, LineFit, PlaneFit};
use super::Verdict;
use crate::coeffs::CoeffField;
use crate::error::{param, Error, Result};
use crate::lepage::p_j;

/// Exponent of the slack term in the binomial bound.
pub const BINOMIAL_SLACK_EXP: f64 = 0.75;
/// Largest admissible binomial constant.
pub const BINOMIAL_CONST_MAX: f64 = 10.0;
/// Largest admissible slope of the log-maxima in units of `j log 2`.
pub const EXP_SLOPE_MAX: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub levels: Vec<i32>,
    /// Mean over draws of `log max_k |Re ε_{j,k}|`.
    pub mean_log_max: Vec<f64>,
    /// Fit against `log(1+j)`.
    pub log_fit: LineFit,
    /// Fit against `j log 2`.
    pub exp_fit: LineFit,
    /// Joint fit against `log(1+j)` and `j log 2`; informational only.
    pub joint_fit: PlaneFit,
    pub n_draws: usize,
    pub verdicts: Vec<Verdict>,
}

/// `max_k |Re ε_{j,k}|` per level of one field.
pub fn level_maxima(field: &CoeffField) -> Vec<f64> {
    field.levels.iter().map(|l| l.max_abs()).collect()
}

/// Regresses the pooled log-maxima on `log(1+j)` and on `j log 2`.
/// `maxima[d][i]` belongs to draw `d` and level `levels[i]`.
pub fn growth_regression(maxima: &[Vec<f64>], levels: &[i32], alpha: f64) -> Result<GrowthReport> {
    if maxima.is_empty() {
        return param("growth regression needs at least one draw");
    }
    if maxima.iter().any(|m| m.len() != levels.len()) || levels.iter().any(|&j| j < 0) {
        return param("one maximum per nonnegative level is required for every draw");
    }
    let mut mean_log_max = Vec::with_capacity(levels.len());
    for i in 0..levels.len() {
        let logs: Vec<f64> = maxima.iter().map(|m| m[i].ln()).collect();
        if logs.iter().any(|l| !l.is_finite()) {
            return Err(Error::Numeric(format!(
                "level {} has a zero or non-finite maximum in some draw",
                levels[i]
            )));
        }
        mean_log_max.push(mean(&logs));
    }
    let x_log: Vec<f64> = levels.iter().map(|&j| (1.0 + j as f64).ln()).collect();
    let x_exp: Vec<f64> = levels.iter().map(|&j| j as f64 * std::f64::consts::LN_2).collect();
    let log_fit = ols(&x_log, &mean_log_max)?;
    let exp_fit = ols(&x_exp, &mean_log_max)?;
    let joint_fit = ols2(&x_log, &x_exp, &mean_log_max)?;
    let upper = 1.0 / alpha + 0.5;
    let verdicts = vec![
        Verdict::check("coeff_log_growth", 1.0 / alpha, log_fit.slope, log_fit.slope_stderr, (0.0, upper)),
        Verdict::check(
            "coeff_not_polynomial_in_2j",
            0.0,
            exp_fit.slope,
            exp_fit.slope_stderr,
            (f64::NEG_INFINITY, EXP_SLOPE_MAX),
        ),
    ];
    Ok(GrowthReport {
        levels: levels.to_vec(),
        mean_log_max,
        log_fit,
        exp_fit,
        joint_fit,
        n_draws: maxima.len(),
        verdicts,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinomialReport {
    /// `max B_m^j / (p_j m + m^{3/4})` over draws, levels and `m`.
    pub constant: f64,
    /// Where the maximum is attained: `(draw, j, m)`.
    pub argmax: (usize, i32, usize),
    pub verdict: Verdict,
}

/// `counts[d][i][m-1] = B_m^{levels[i]}` for draw `d`.
pub fn binomial_constant(counts: &[Vec<Vec<u32>>], levels: &[i32], eps: f64) -> Result<BinomialReport> {
    if counts.is_empty() {
        return param("binomial constant needs at least one draw");
    }
    let p: Vec<f64> = levels.iter().map(|&j| p_j(j, eps)).collect::<Result<_>>()?;
    let mut best = (0.0, (0, 0, 0));
    for (d, per_draw) in counts.iter().enumerate() {
        if per_draw.len() != levels.len() {
            return param("one count sequence per level is required for every draw");
        }
        for (i, seq) in per_draw.iter().enumerate() {
            for (mi, &b) in seq.iter().enumerate() {
                let m = (mi + 1) as f64;
                let r = b as f64 / (p[i] * m + m.powf(BINOMIAL_SLACK_EXP));
                if r > best.0 {
                    best = (r, (d, levels[i], mi + 1));
                }
            }
        }
    }
    let verdict = Verdict::check(
        "binomial_constant",
        BINOMIAL_CONST_MAX,
        best.0,
        0.0,
        (0.0, BINOMIAL_CONST_MAX),
    );
    Ok(BinomialReport { constant: best.0, argmax: best.1, verdict })
}
