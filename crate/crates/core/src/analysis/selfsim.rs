//! Self-similarity and stationarity of increments across an ensemble.

use super::ecf::{ecf_distance, ecf_scale_alpha};
use super::stats::{ols, LineFit};
use super::{Grid, Verdict};
use crate::error::{param, Error, Result};

/// Minimum ensemble size for the scale estimates.
pub const MIN_PATHS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimReport {
    pub times: Vec<f64>,
    /// ECF scale of `{X(t)}` across paths at each time.
    pub scales: Vec<f64>,
    pub alphas: Vec<f64>,
    pub fit: LineFit,
    /// `(t, σ̂(2t)/σ̂(t))` for every `t` whose double is also listed.
    pub ratios: Vec<(f64, f64)>,
    /// Lag and the two start times compared for stationarity.
    pub stationarity_lag: f64,
    pub stationarity_starts: (f64, f64),
    pub stationarity_distance: f64,
    pub stationarity_threshold: f64,
    pub n_paths: usize,
    pub verdicts: Vec<Verdict>,
}

fn column(paths: &[Vec<f64>], i: usize) -> Vec<f64> {
    paths.iter().map(|p| p[i]).collect()
}

/// Fits `log σ̂(t)` against `log t` for the grid times `t_list` and compares
/// increments over the smallest listed lag started at the left edge and at 0.
pub fn self_similarity_check(paths: &[Vec<f64>], grid: &Grid, t_list: &[f64], hurst: f64) -> Result<SelfSimReport> {
    if paths.len() < MIN_PATHS {
        return param(format!(
            "self-similarity check needs at least {MIN_PATHS} paths, got {}",
            paths.len()
        ));
    }
    if paths.iter().any(|p| p.len() != grid.len) {
        return param("paths do not match the grid");
    }
    if t_list.len() < 3 {
        return param("self-similarity check needs at least three times");
    }
    let mut idx = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("time {t} must be positive")));
        }
        idx.push(
            grid.index_of(t)
                .ok_or_else(|| Error::Domain(format!("time {t} is not a grid node")))?,
        );
    }
    let mut scales = Vec::with_capacity(idx.len());
    let mut alphas = Vec::with_capacity(idx.len());
    for &i in &idx {
        let f = ecf_scale_alpha(&column(paths, i))?;
        scales.push(f.scale);
        alphas.push(f.alpha);
    }
    let x: Vec<f64> = t_list.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let fit = ols(&x, &y)?;

    let mut ratios = Vec::new();
    for (a, &t) in t_list.iter().enumerate() {
        if let Some(b) = t_list.iter().position(|&s| (s - 2.0 * t).abs() <= 1e-12 * s) {
            ratios.push((t, scales[b] / scales[a]));
        }
    }

    let lag = t_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let lag_steps = idx[t_list.iter().position(|&t| t == lag).unwrap()] - grid.origin;
    let left = 0usize;
    if left + lag_steps >= grid.len || grid.origin + lag_steps >= grid.len {
        return Err(Error::Domain(format!("lag {lag} does not fit in the grid")));
    }
    let inc_left: Vec<f64> = paths.iter().map(|p| p[left + lag_steps] - p[left]).collect();
    let inc_zero: Vec<f64> = paths
        .iter()
        .map(|p| p[grid.origin + lag_steps] - p[grid.origin])
        .collect();
    let distance = ecf_distance(&inc_zero, &inc_left)?;
    let threshold = 4.0 * (2.0 / paths.len() as f64).sqrt();

    let mut verdicts = vec![
        Verdict::check("selfsim_exponent", hurst, fit.slope, fit.slope_stderr, (hurst - 0.1, hurst + 0.1)),
        Verdict::check("increment_stationarity", 0.0, distance, threshold / 4.0, (0.0, threshold)),
    ];
    let r = 2f64.powf(hurst);
    for &(t, q) in &ratios {
        verdicts.push(Verdict::check(
            &format!("scale_ratio_t={t}"),
            r,
            q,
            f64::NAN,
            (0.9 * r, 1.1 * r),
        ));
    }
    Ok(SelfSimReport {
        times: t_list.to_vec(),
        scales,
        alphas,
        fit,
        ratios,
        stationarity_lag: lag,
        stationarity_starts: (grid.time(left), 0.0),
        stationarity_distance: distance,
        stationarity_threshold: threshold,
        n_paths: paths.len(),
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::DaviesHarte;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fbm_is_self_similar() {
        let h = 0.7;
        let dt = 1.0 / 64.0;
        let dh = DaviesHarte::new(129, dt, h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut paths = Vec::new();
        for _ in 0..300 {
            let (a, b) = dh.sample_pair(&mut rng);
            // shift so that t = 0 sits in the middle of the grid
            for p in [a, b] {
                let mid = p[64];
                paths.push(p.iter().map(|x| x - mid).collect::<Vec<f64>>());
            }
        }
        let grid = Grid::new(dt, 64, 129).unwrap();
        let r = self_similarity_check(&paths, &grid, &[0.0625, 0.125, 0.25, 0.5, 1.0], h).unwrap();
        assert!(r.verdicts[0].pass, "{:?}", r.fit);
        assert!(r.verdicts[1].pass, "{} vs {}", r.stationarity_distance, r.stationarity_threshold);
        assert_eq!(r.ratios.len(), 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = Grid::new(0.25, 4, 9).unwrap();
        let few = vec![vec![0.0; 9]; 10];
        assert!(matches!(
            self_similarity_check(&few, &grid, &[0.25, 0.5, 1.0], 0.5),
            Err(Error::Parameter(_))
        ));
        let many = vec![vec![0.0; 9]; 200];
        assert!(matches!(
            self_similarity_check(&many, &grid, &[0.25, 0.3, 1.0], 0.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            self_similarity_check(&many, &grid, &[-0.25, 0.5, 1.0], 0.5),
            Err(Error::Domain(_))
        ));
    }
}
