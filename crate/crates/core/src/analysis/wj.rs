//! Smoothed increments `W_j` and the normalized lower-bound statistic.
//!
//! `W_j = ∫_{|t|≤R} θ(t) (X(2^{-j}k̄_j + 2^{-j}t) − X(2^{-j}k̄_j)) dt`, where `θ` is
//! the time-domain bump of [`crate::meyer::theta_hat`]. With `R = 2^{j/2}` this is
//! the truncated functional `W̃_j`. With a radius independent of `j`,
//! self-similarity gives `σ(W_j) = c·2^{-jH}` exactly when `k̄_j = 0`. As `R` grows
//! only wavelet levels `j−4..=j−2` reach the integral because `θ̂` lives on
//! `1/2 ≤ |ξ| ≤ 1`; `θ` itself is spread over `|t| ≲ 80`.

use rayon::prelude::*;

use super::ecf::ecf_scale_alpha;
use super::stats::{median, ols, LineFit};
use super::{Grid, Verdict};
use crate::error::{param, Error, Result};
use crate::meyer::ThetaTime;

/// Finest quadrature step in the rescaled variable `t`.
const MAX_STEP: f64 = 0.125;

/// `k̄_j = ⌊2^{j−1}(u+v)⌋`.
pub fn kbar_j(j: u32, u: f64, v: f64) -> Result<i64> {
    if !(u < v) || !u.is_finite() || !v.is_finite() {
        return param(format!("k̄_j needs finite u < v, got u={u}, v={v}"));
    }
    Ok((2f64.powi(j as i32 - 1) * (u + v)).floor() as i64)
}

/// Integration radius in the rescaled variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// `R = 2^{j/2}`.
    Dyadic,
    Fixed(f64),
}

impl Window {
    pub fn radius(&self, j: u32) -> f64 {
        match *self {
            Window::Dyadic => 2f64.powf(j as f64 / 2.0),
            Window::Fixed(r) => r,
        }
    }
}

/// Trapezoid nodes and `θ`-weighted weights for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaWeights {
    pub j: u32,
    pub radius: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ThetaWeights {
    /// Nodes step through every path sample (subdivided until the step is at
    /// most 1/8) and end exactly at `±R`.
    pub fn new(j: u32, window: Window, dt: f64) -> Result<Self> {
        let radius = window.radius(j);
        if !(radius > 0.0 && radius.is_finite()) || !(dt > 0.0) {
            return param(format!("invalid window radius {radius} or step {dt}"));
        }
        let mut step = 2f64.powi(j as i32) * dt;
        while step > MAX_STEP {
            step /= 2.0;
        }
        let m = (radius / step).floor() as i64;
        let mut nodes: Vec<f64> = Vec::with_capacity(2 * m as usize + 3);
        if (m as f64) * step < radius {
            nodes.push(-radius);
        }
        nodes.extend((-m..=m).map(|i| i as f64 * step));
        if (m as f64) * step < radius {
            nodes.push(radius);
        }
        let theta = ThetaTime::new();
        let mut weights = vec![0.0; nodes.len()];
        for i in 0..nodes.len() - 1 {
            let h = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        for (w, &t) in weights.iter_mut().zip(&nodes) {
            *w *= theta.eval(t)?;
        }
        Ok(Self { j, radius, nodes, weights })
    }
}

/// `W_j` of one path, by the trapezoid rule on interpolated path values.
pub fn wj_functional(path: &[f64], grid: &Grid, weights: &ThetaWeights, u: f64, v: f64) -> Result<f64> {
    if path.len() != grid.len {
        return param(format!("path has {} points but the grid has {}", path.len(), grid.len));
    }
    let scale = 2f64.powi(-(weights.j as i32));
    let centre = scale * kbar_j(weights.j, u, v)? as f64;
    let x0 = grid.interpolate(path, centre)?;
    for edge in [-weights.radius, weights.radius] {
        grid.interpolate(path, centre + scale * edge)?;
    }
    let mut acc = 0.0;
    for (&t, &w) in weights.nodes.iter().zip(&weights.weights) {
        acc += w * (grid.interpolate(path, centre + scale * t)? - x0);
    }
    Ok(acc)
}

/// `W_j` for every path and every level in `levels`; row per level.
pub fn wj_matrix(
    paths: &[Vec<f64>],
    grid: &Grid,
    levels: &[u32],
    window: Window,
    u: f64,
    v: f64,
) -> Result<Vec<Vec<f64>>> {
    levels
        .iter()
        .map(|&j| {
            let w = ThetaWeights::new(j, window, grid.dt)?;
            paths.par_iter().map(|p| wj_functional(p, grid, &w, u, v)).collect()
        })
        .collect()
}

/// Fit of `log σ(W_j)` against `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct WjScaleFit {
    pub levels: Vec<u32>,
    pub scales: Vec<f64>,
    pub alphas: Vec<f64>,
    pub fit: LineFit,
    pub verdict: Verdict,
}

/// Regresses the ECF scale of `{W_j}` across paths on `j`; the target slope is `−H log 2`.
pub fn wj_scale_regression(values: &[Vec<f64>], levels: &[u32], hurst: f64) -> Result<WjScaleFit> {
    if values.len() != levels.len() {
        return param("one row of W_j values per level is required");
    }
    let mut scales = Vec::with_capacity(levels.len());
    let mut alphas = Vec::with_capacity(levels.len());
    for (row, &j) in values.iter().zip(levels) {
        let f = ecf_scale_alpha(row).map_err(|e| match e {
            Error::Numeric(m) => Error::Numeric(format!("W_{j}: {m}")),
            other => other,
        })?;
        scales.push(f.scale);
        alphas.push(f.alpha);
    }
    let x: Vec<f64> = levels.iter().map(|&j| j as f64).collect();
    let y: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let fit = ols(&x, &y)?;
    let target = -hurst * std::f64::consts::LN_2;
    let tol = 0.1 * target.abs();
    let verdict = Verdict::check(
        "wj_scale_slope",
        target,
        fit.slope,
        fit.slope_stderr,
        (target - tol, target + tol),
    );
    Ok(WjScaleFit { levels: levels.to_vec(), scales, alphas, fit, verdict })
}

/// Running maxima of `2^{jH}(j+1)^{−1/α}|W̃_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimsupDiagnostic {
    pub levels: Vec<u32>,
    /// Median over paths of the running maximum up to each level.
    pub pooled: Vec<f64>,
    /// Levels `(J₀, J₁)` whose pooled running maxima are compared.
    pub compared: (u32, u32),
    /// Fraction of paths whose running maximum at `J₁` exceeds the one at `J₀`.
    pub fraction_increased: f64,
    pub verdict: Verdict,
}

/// `levels` must be increasing; the verdict asks that the pooled running maximum
/// at level `compare.1` strictly exceeds the one at `compare.0`.
pub fn limsup_diagnostic(
    values: &[Vec<f64>],
    levels: &[u32],
    hurst: f64,
    alpha: f64,
    compare: (u32, u32),
) -> Result<LimsupDiagnostic> {
    if values.len() != levels.len() || levels.len() < 2 {
        return param("limsup diagnostic needs at least two levels with one row each");
    }
    if levels.windows(2).any(|p| p[0] >= p[1]) {
        return param("levels must be strictly increasing");
    }
    let pos = |j: u32| {
        levels
            .iter()
            .position(|&l| l == j)
            .ok_or_else(|| Error::Parameter(format!("compared level {j} is not among the levels")))
    };
    let (i0, i1) = (pos(compare.0)?, pos(compare.1)?);
    if i0 >= i1 {
        return param("compared levels must be increasing");
    }
    let n = values[0].len();
    if n == 0 || values.iter().any(|r| r.len() != n) {
        return param("every level needs the same nonzero number of paths");
    }
    let mut running = vec![0.0f64; n];
    let mut snapshots = Vec::with_capacity(2);
    let mut pooled = Vec::with_capacity(levels.len());
    for (i, (row, &j)) in values.iter().zip(levels).enumerate() {
        let norm = 2f64.powf(j as f64 * hurst) * (j as f64 + 1.0).powf(-1.0 / alpha);
        for (r, w) in running.iter_mut().zip(row) {
            *r = r.max(norm * w.abs());
        }
        if i == i0 || i == i1 {
            snapshots.push(running.clone());
        }
        pooled.push(median(&running));
    }
    let increased = snapshots[1].iter().zip(&snapshots[0]).filter(|(a, b)| a > b).count();
    let (p0, p1) = (pooled[i0], pooled[i1]);
    let verdict = Verdict::check("wj_limsup_growth", p0, p1, 0.0, (p0 * (1.0 + 1e-12), f64::INFINITY));
    Ok(LimsupDiagnostic {
        levels: levels.to_vec(),
        pooled,
        compared: compare,
        fraction_increased: increased as f64 / n as f64,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kbar_examples() {
        assert_eq!(kbar_j(3, 0.0, 1.0).unwrap(), 4);
        for j in 0..12 {
            assert_eq!(kbar_j(j, -1.0, 1.0).unwrap(), 0);
        }
        assert!(matches!(kbar_j(2, 1.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(kbar_j(2, 1.0, 0.0), Err(Error::Parameter(_))));
    }

    fn grid() -> Grid {
        Grid::new(1.0 / 256.0, 512, 1025).unwrap()
    }

    #[test]
    fn functional_is_linear_and_shift_invariant() {
        let g = grid();
        let w = ThetaWeights::new(4, Window::Dyadic, g.dt).unwrap();
        let path: Vec<f64> = (0..g.len).map(|i| (7.0 * g.time(i)).sin() + g.time(i).powi(2)).collect();
        let a = wj_functional(&path, &g, &w, -0.5, 0.5).unwrap();
        let shifted: Vec<f64> = path.iter().map(|x| x + 3.0).collect();
        let scaled: Vec<f64> = path.iter().map(|x| -2.5 * x).collect();
        assert!((wj_functional(&shifted, &g, &w, -0.5, 0.5).unwrap() - a).abs() < 1e-12);
        assert!((wj_functional(&scaled, &g, &w, -0.5, 0.5).unwrap() + 2.5 * a).abs() < 1e-12);
        assert_eq!(wj_functional(&vec![0.0; g.len], &g, &w, -0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn passband_cosine_is_recovered() {
        // X(s) = cos(ω 2^j s) with ω in the band of θ̂ gives W_j ≈ θ̂(ω) = 1 at ω = 3/4.
        let g = Grid::new(1.0 / 4096.0, 8192, 16385).unwrap();
        let j = 6;
        let w = ThetaWeights::new(j, Window::Fixed(120.0), g.dt).unwrap();
        let path: Vec<f64> = (0..g.len).map(|i| (0.75 * 64.0 * g.time(i)).cos()).collect();
        let val = wj_functional(&path, &g, &w, -1.0, 1.0).unwrap();
        assert!((val - 1.0).abs() < 1e-3, "{val}");
    }

    #[test]
    fn coverage_violation_is_a_domain_error() {
        let g = grid();
        let w = ThetaWeights::new(0, Window::Fixed(8.0), g.dt).unwrap();
        let path = vec![1.0; g.len];
        assert!(matches!(wj_functional(&path, &g, &w, -0.5, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn nodes_end_at_the_radius() {
        let w = ThetaWeights::new(3, Window::Dyadic, 1.0 / 1024.0).unwrap();
        assert_eq!(*w.nodes.first().unwrap(), -w.radius);
        assert_eq!(*w.nodes.last().unwrap(), w.radius);
        assert!(w.nodes.windows(2).all(|p| p[1] > p[0] && p[1] - p[0] <= MAX_STEP));
    }

    #[test]
    fn limsup_running_max_is_monotone() {
        let values = vec![vec![1.0, 0.1, 3.0], vec![0.2, 5.0, 0.1], vec![0.1, 0.1, 9.0]];
        let d = limsup_diagnostic(&values, &[2, 3, 4], 0.5, 1.5, (2, 4)).unwrap();
        assert!(d.pooled.windows(2).all(|p| p[1] >= p[0]));
        assert!(d.verdict.pass);
        assert!((d.fraction_increased - 2.0 / 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn kbar_is_close_to_midpoint(j in 0u32..=20, u in -4.0f64..4.0, len in 1e-3f64..4.0) {
            let v = u + len;
            let k = kbar_j(j, u, v).unwrap() as f64;
            let s = 2f64.powi(-(j as i32));
            prop_assert!((s * k - 0.5 * (u + v)).abs() < s);
        }
    }
}
