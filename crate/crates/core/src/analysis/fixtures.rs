//! Reference signals with known laws, used as controls for the estimators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{param, Result};

/// Standard SαS variate (`E e^{iθX} = e^{−|θ|^α}`) by the Chambers–Mallows–Stuck method.
pub fn stable_cms<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = (rng.random::<f64>() - 0.5) * PI;
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        return v.tan();
    }
    (alpha * v).sin() / v.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Exact fractional Brownian motion by circulant embedding (Davies–Harte).
pub struct DaviesHarte {
    m: usize,
    sqrt_eig: Vec<f64>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl DaviesHarte {
    /// Generator of paths with `n_points` samples at step `dt`, starting at 0.
    pub fn new(n_points: usize, dt: f64, hurst: f64) -> Result<Self> {
        if n_points < 2 || !(hurst > 0.0 && hurst < 1.0) || !(dt > 0.0) {
            return param(format!(
                "FBM needs n_points >= 2, H in (0,1), dt > 0; got {n_points}, {hurst}, {dt}"
            ));
        }
        let m = n_points - 1;
        let h2 = 2.0 * hurst;
        let var = dt.powf(h2);
        let gamma = |k: usize| {
            let k = k as f64;
            0.5 * var * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
        };
        let size = 2 * m;
        let mut c: Vec<Complex64> = (0..size)
            .map(|i| Complex64::new(gamma(if i <= m { i } else { size - i }), 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(size);
        fft.process(&mut c);
        let sqrt_eig = c
            .iter()
            .map(|z| (z.re.max(0.0) / size as f64).sqrt())
            .collect();
        Ok(Self { m, sqrt_eig, fft })
    }

    pub fn n_points(&self) -> usize {
        self.m + 1
    }

    /// Two independent paths from one transform.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mut z: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut z);
        let mut a = Vec::with_capacity(self.m + 1);
        let mut b = Vec::with_capacity(self.m + 1);
        let (mut x, mut y) = (0.0, 0.0);
        a.push(0.0);
        b.push(0.0);
        for v in &z[..self.m] {
            x += v.re;
            y += v.im;
            a.push(x);
            b.push(y);
        }
        (a, b)
    }
}

impl std::fmt::Debug for DaviesHarte {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DaviesHarte").field("n_points", &(self.m + 1)).finish()
    }
}

/// Deterministic Weierstrass-type signal `Σ_n 2^{-nH} cos(2^n π t)`, exactly Hölder-`H`.
pub fn weierstrass(n_points: usize, dt: f64, hurst: f64) -> Vec<f64> {
    let levels = ((1.0 / dt).log2().ceil() as i32 + 4).max(1);
    (0..n_points)
        .map(|i| {
            let t = i as f64 * dt;
            (0..levels)
                .map(|n| 2f64.powf(-(n as f64) * hurst) * (2f64.powi(n) * PI * t).cos())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::stats::{ks_pvalue, ks_statistic};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cauchy_case_matches_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x: Vec<f64> = (0..5000).map(|_| stable_cms(1.0, &mut rng)).collect();
        let d = ks_statistic(&mut x, |v| 0.5 + v.atan() / PI);
        assert!(ks_pvalue(d, x.len()) > 0.01);
    }

    #[test]
    fn stable_two_is_gaussian_with_variance_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..20_000).map(|_| stable_cms(2.0, &mut rng)).collect();
        let v = x.iter().map(|a| a * a).sum::<f64>() / x.len() as f64;
        assert!((v - 2.0).abs() < 0.1);
    }

    #[test]
    fn fbm_increment_variance() {
        let h = 0.3;
        let dt = 1.0 / 256.0;
        let dh = DaviesHarte::new(257, dt, h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut s1, mut s64) = (0.0, 0.0);
        let reps = 400;
        for _ in 0..reps {
            let (a, b) = dh.sample_pair(&mut rng);
            assert_eq!(a[0], 0.0);
            for p in [a, b] {
                s1 += (p[101] - p[100]).powi(2);
                s64 += (p[164] - p[100]).powi(2);
            }
        }
        let n = 2.0 * reps as f64;
        let (v1, v64) = (s1 / n, s64 / n);
        assert!((v1 / dt.powf(2.0 * h) - 1.0).abs() < 0.15, "{v1}");
        assert!((v64 / (64.0 * dt).powf(2.0 * h) - 1.0).abs() < 0.15, "{v64}");
    }
}
