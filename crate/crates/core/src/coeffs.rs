//! Wavelet coefficients `Re ε_{α,j,k}` from a LePage draw.
//!
//! With `gp_m = Γ_m^{-1/α}` and `λ_m = λ_{0,m} + iλ_{1,m}`, the truncated series is
//! `a_α Σ_{m≤M} gp_m Re(λ_m g_m)`. The Abel rearrangement
//! `a_α [gp_M D_M + Σ_{m<M} (gp_m − gp_{m+1}) D_m]`, with `D = S₀ − S₁`, is the
//! form used for whole fields because it comes with a tail estimate.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::beta::beta;

use crate::error::{param, Error, Result};
use crate::lepage::{in_annulus, LePageDraw, Zeta};
use crate::meyer::psi_hat;
use crate::quad::Neumaier;
use crate::rng::SeedRecord;

const LN_2: f64 = std::f64::consts::LN_2;
/// Phase recurrences in `k` are re-anchored with a direct `sin_cos` this often.
const REANCHOR: usize = 256;

/// `φ(ζ)^{-1/α} 2^{-j/α} ψ̂(−2^{-j}ζ)`, the `k`-independent factor of `λ`,
/// together with `ω = 2^{-j}ζ`. Zero outside the annulus.
#[inline]
fn lambda_base(j: i32, z: &Zeta, alpha: f64, eps: f64) -> (Complex64, f64) {
    if !in_annulus(z, j) {
        return (Complex64::new(0.0, 0.0), 0.0);
    }
    let log_omega = z.log_abs - j as f64 * LN_2;
    let omega = z.sign * log_omega.exp();
    // φ(ζ)^{-1/α} 2^{-j/α} = ((4/ε)|ω|(1 + |log|ζ||)^{1+ε})^{1/α}
    let pref = ((4.0 / eps).ln() + log_omega + (1.0 + eps) * z.log_abs.abs().ln_1p()) / alpha;
    (pref.exp() * psi_hat(-omega), omega)
}

/// `(λ₀, λ₁)` for a frequency given in log form.
#[inline]
pub fn lambda_zeta(j: i32, k: i64, z: &Zeta, alpha: f64, eps: f64) -> (f64, f64) {
    let (base, omega) = lambda_base(j, z, alpha, eps);
    if base == Complex64::new(0.0, 0.0) {
        return (0.0, 0.0);
    }
    let (s, c) = (k as f64 * omega).sin_cos();
    let l = base * Complex64::new(c, s);
    (l.re, l.im)
}

/// Real and imaginary parts of `φ(ζ)^{-1/α} 2^{-j/α} e^{ik2^{-j}ζ} ψ̂(−2^{-j}ζ)`.
pub fn lambdas(j: i32, k: i64, zeta: f64, alpha: f64, eps: f64) -> Result<(f64, f64)> {
    if zeta == 0.0 || !zeta.is_finite() {
        return Err(Error::Domain(format!("λ needs a finite nonzero frequency, got {zeta}")));
    }
    let z = Zeta { sign: zeta.signum(), log_abs: zeta.abs().ln() };
    Ok(lambda_zeta(j, k, &z, alpha, eps))
}

fn check_m(draw: &LePageDraw, m: usize, extra: usize) -> Result<()> {
    if m + extra > draw.truncation {
        return param(format!(
            "truncation {m} (+{extra}) exceeds the {} terms of the draw",
            draw.truncation
        ));
    }
    Ok(())
}

/// `S_{0,m}` and `S_{1,m}` for `m = 0..=M`, with `S_{l,0} = 0`.
pub fn partial_sums(j: i32, k: i64, draw: &LePageDraw, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_m(draw, m, 0)?;
    let mut s0 = Vec::with_capacity(m + 1);
    let mut s1 = Vec::with_capacity(m + 1);
    let (mut a0, mut a1) = (Neumaier::default(), Neumaier::default());
    s0.push(0.0);
    s1.push(0.0);
    for n in 0..m {
        let (l0, l1) = lambda_zeta(j, k, &draw.zetas[n], draw.alpha, draw.eps);
        a0.add(l0 * draw.g_re[n]);
        a1.add(l1 * draw.g_im[n]);
        s0.push(a0.sum());
        s1.push(a1.sum());
    }
    Ok((s0, s1))
}

/// Direct truncated sum `a_α Σ_{m≤M} Γ_m^{-1/α}(λ₀g₀ − λ₁g₁)`.
pub fn coeff_direct(j: i32, k: i64, draw: &LePageDraw, m: usize) -> Result<f64> {
    check_m(draw, m, 0)?;
    let mut acc = Neumaier::default();
    for n in 0..m {
        let (l0, l1) = lambda_zeta(j, k, &draw.zetas[n], draw.alpha, draw.eps);
        if l0 == 0.0 && l1 == 0.0 {
            continue;
        }
        let gp = draw.gammas[n].powf(-1.0 / draw.alpha);
        acc.add(gp * (l0 * draw.g_re[n] - l1 * draw.g_im[n]));
    }
    Ok(draw.a_alpha * acc.sum())
}

/// Abel-summed coefficient and its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelValue {
    pub value: f64,
    pub tail_estimate: f64,
}

/// Abel form of the truncated sum; needs `Γ_{M+1}`.
pub fn coeff_abel(j: i32, k: i64, draw: &LePageDraw, m: usize) -> Result<AbelValue> {
    check_m(draw, m, 1)?;
    if m == 0 {
        return param("Abel summation needs M >= 1");
    }
    let (s0, s1) = partial_sums(j, k, draw, m)?;
    let gp = |i: usize| draw.gammas[i - 1].powf(-1.0 / draw.alpha);
    let mut acc = Neumaier::default();
    acc.add(gp(m) * (s0[m] - s1[m]));
    let mut lam2 = 0.0;
    for i in 1..m {
        let d = s0[i] - s1[i];
        if d != 0.0 {
            acc.add((gp(i) - gp(i + 1)) * d);
        }
    }
    for n in 0..m {
        let (l0, l1) = lambda_zeta(j, k, &draw.zetas[n], draw.alpha, draw.eps);
        lam2 += l0 * l0 + l1 * l1;
    }
    Ok(AbelValue {
        value: draw.a_alpha * acc.sum(),
        tail_estimate: tail_estimate(draw, m, lam2, j, k),
    })
}

/// Heuristic size of the neglected Abel tail `Σ_{m≥M}(gp_m − gp_{m+1})(D_m − D_M)`.
///
/// Uses `gp_m − gp_{m+1} ≲ E_{m+1}/(αΓ_mΓ_{m+1}^{1/α})` with `Γ_m ≈ m Γ_M/M`, the
/// Gaussian partial-sum bound `4σ√(Σ|λ|² log(3+j+|k|+m))` with the per-index
/// energy of the first `M` terms, and `∫₁^∞ x^{-1-1/α}√(x−1) dx = B(1/α − 1/2, 3/2)`.
/// The result scales like `M^{1/2 − 1/α}`.
pub fn tail_estimate(draw: &LePageDraw, m: usize, lambda_energy: f64, j: i32, k: i64) -> f64 {
    if lambda_energy == 0.0 || m == 0 {
        return 0.0;
    }
    let a = draw.alpha;
    let mf = m as f64;
    let kappa = 1.0 / a - 0.5;
    let shape = if kappa > 0.0 { beta(kappa, 1.5) } else { f64::INFINITY };
    let ratio = (mf / draw.gammas[m - 1]).powf(1.0 + 1.0 / a);
    let log = (3.0 + j.unsigned_abs() as f64 + k.unsigned_abs() as f64 + mf).ln();
    draw.a_alpha * 4.0 * draw.sigma_g / a
        * (2.0 * lambda_energy / mf).sqrt()
        * log.sqrt()
        * ratio
        * mf.powf(-kappa)
        * shape
}

/// `B_m^j = #{n ≤ m : 2^{-j}ζ_n ∈ R₀}` for `m = 1..=M`.
pub fn binomial_counts(j: i32, draw: &LePageDraw, m: usize) -> Result<Vec<u32>> {
    check_m(draw, m, 0)?;
    let mut count = 0u32;
    Ok(draw.zetas[..m]
        .iter()
        .map(|z| {
            count += in_annulus(z, j) as u32;
            count
        })
        .collect())
}

/// The active LePage terms of one level, shared across all `k`.
#[derive(Debug, Clone)]
pub struct LevelTerms {
    pub j: i32,
    /// 0-based indices `n` with `2^{-j}ζ_n ∈ R₀`, increasing.
    pub active: Vec<usize>,
    omega: Vec<f64>,
    /// `λ_n(k=0) g_n`.
    w: Vec<Complex64>,
    /// Abel weights `gp_{n_a} − gp_{n_{a+1}}`, with `gp` past the last active term taken as 0.
    delta: Vec<f64>,
    lambda_energy: f64,
}

impl LevelTerms {
    pub fn new(draw: &LePageDraw, j: i32, m: usize) -> Result<Self> {
        check_m(draw, m, 0)?;
        let mut active = Vec::new();
        let mut omega = Vec::new();
        let mut w = Vec::new();
        let mut gp = Vec::new();
        let mut lambda_energy = 0.0;
        for n in 0..m {
            let z = &draw.zetas[n];
            if !in_annulus(z, j) {
                continue;
            }
            let (base, om) = lambda_base(j, z, draw.alpha, draw.eps);
            active.push(n);
            omega.push(om);
            w.push(base * Complex64::new(draw.g_re[n], draw.g_im[n]));
            gp.push(draw.gammas[n].powf(-1.0 / draw.alpha));
            lambda_energy += base.norm_sqr();
        }
        let delta = (0..gp.len())
            .map(|a| gp[a] - gp.get(a + 1).copied().unwrap_or(0.0))
            .collect();
        Ok(Self { j, active, omega, w, delta, lambda_energy })
    }

    pub fn lambda_energy(&self) -> f64 {
        self.lambda_energy
    }

    /// `Re ε_{α,j,k}/a_α` for `k = k_lo..=k_hi` by sparse Abel summation.
    pub fn abel_range(&self, k_lo: i64, k_hi: i64) -> Vec<f64> {
        let len = (k_hi - k_lo + 1).max(0) as usize;
        let mut out = vec![0.0; len];
        if self.active.is_empty() || len == 0 {
            return out;
        }
        let b = self.active.len();
        let mut z = vec![Complex64::new(0.0, 0.0); b];
        let step: Vec<Complex64> = self
            .omega
            .iter()
            .map(|&om| {
                let (s, c) = om.sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        for (i, slot) in out.iter_mut().enumerate() {
            let k = k_lo + i as i64;
            if i % REANCHOR == 0 {
                for a in 0..b {
                    let (s, c) = (k as f64 * self.omega[a]).sin_cos();
                    z[a] = self.w[a] * Complex64::new(c, s);
                }
            } else {
                for a in 0..b {
                    z[a] *= step[a];
                }
            }
            let mut d = 0.0;
            let mut acc = 0.0;
            for a in 0..b {
                d += z[a].re;
                acc += self.delta[a] * d;
            }
            *slot = acc;
        }
        out
    }
}

/// Coefficients `Re ε_{α,j,k}` for `k_lo ≤ k ≤ k_hi` at one level.
pub fn level_coeffs(draw: &LePageDraw, j: i32, k_lo: i64, k_hi: i64, m: usize) -> Result<Vec<f64>> {
    let terms = LevelTerms::new(draw, j, m)?;
    let mut v = terms.abel_range(k_lo, k_hi);
    v.iter_mut().for_each(|x| *x *= draw.a_alpha);
    Ok(v)
}

/// One level of a [`CoeffField`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldLevel {
    pub j: i32,
    /// Window half-width `⌊2^j ρ⌋`; `k` runs over `−k_max..=k_max`.
    pub k_max: i64,
    pub values: Vec<f64>,
    pub tails: Vec<f64>,
    /// `B_m^j` for `m = 1..=M`.
    pub binomials: Vec<u32>,
}

impl FieldLevel {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `Re ε_{α,j,k}` over `0 ≤ j ≤ j_max`, `|k| ≤ 2^j ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffField {
    pub j_max: i32,
    pub rho: f64,
    pub truncation: usize,
    pub levels: Vec<FieldLevel>,
    pub draw_seed: SeedRecord,
}

/// Default memory cap for a coefficient field, in bytes.
pub const DEFAULT_FIELD_CAP: usize = 1 << 30;

fn window(j: i32, rho: f64) -> i64 {
    (2f64.powi(j) * rho).floor() as i64
}

fn field_bytes(j_max: i32, rho: f64, m: usize) -> f64 {
    (0..=j_max)
        .map(|j| (2 * window(j, rho) + 1) as f64 * 16.0 + m as f64 * 4.0)
        .sum()
}

/// Fills the window with Abel-summed coefficients, one parallel task per level.
pub fn coeff_field(
    draw: &LePageDraw,
    j_max: i32,
    rho: f64,
    m: usize,
    mem_cap: usize,
) -> Result<CoeffField> {
    if j_max < 0 || !(rho >= 0.0 && rho.is_finite()) {
        return param(format!("invalid field window j_max={j_max}, rho={rho}"));
    }
    check_m(draw, m, 1)?;
    if j_max > 40 || field_bytes(j_max, rho, m) > mem_cap as f64 {
        let fit = (0..=j_max.min(40))
            .take_while(|&j| field_bytes(j, rho, m) <= mem_cap as f64)
            .last();
        return Err(Error::Resource(format!(
            "coefficient field up to j={j_max} exceeds the {mem_cap}-byte cap; suggested j_max: {}",
            fit.map_or("none".to_string(), |j| j.to_string())
        )));
    }
    let levels = (0..=j_max)
        .into_par_iter()
        .map(|j| -> Result<FieldLevel> {
            let k_max = window(j, rho);
            let terms = LevelTerms::new(draw, j, m)?;
            let mut values = terms.abel_range(-k_max, k_max);
            values.iter_mut().for_each(|v| *v *= draw.a_alpha);
            if let Some((i, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite coefficient at j={j}, k={}",
                    i as i64 - k_max
                )));
            }
            let tails = (-k_max..=k_max)
                .map(|k| tail_estimate(draw, m, terms.lambda_energy(), j, k))
                .collect();
            Ok(FieldLevel { j, k_max, values, tails, binomials: binomial_counts(j, draw, m)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoeffField { j_max, rho, truncation: m, levels, draw_seed: draw.seed })
}

const FIELD_MAGIC: &[u8; 8] = b"HFSMCOF\0";
const FIELD_VERSION: u32 = 1;

impl CoeffField {
    pub fn get(&self, j: i32, k: i64) -> Option<f64> {
        let lvl = self.levels.get(usize::try_from(j).ok()?)?;
        if k.abs() > lvl.k_max {
            return None;
        }
        Some(lvl.values[(k + lvl.k_max) as usize])
    }

    /// CSV with header `j,k,value,tail_estimate`; floats in shortest round-trip form.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "j,k,value,tail_estimate")?;
        for lvl in &self.levels {
            for (i, (v, t)) in lvl.values.iter().zip(&lvl.tails).enumerate() {
                writeln!(w, "{},{},{:e},{:e}", lvl.j, i as i64 - lvl.k_max, v, t)?;
            }
        }
        Ok(())
    }

    /// Binary layout (little-endian): magic `HFSMCOF\0`, version `u32`, j_max `i32`,
    /// ρ `f64`, M `u64`, master seed `u64`, draw id `u64`; then per level
    /// `k_max u64`, values and tails (`2k_max+1` `f64` each), `M` binomial counts `u32`.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(FIELD_MAGIC)?;
        w.write_all(&FIELD_VERSION.to_le_bytes())?;
        w.write_all(&self.j_max.to_le_bytes())?;
        w.write_all(&self.rho.to_le_bytes())?;
        for v in [self.truncation as u64, self.draw_seed.master_seed, self.draw_seed.draw_id] {
            w.write_all(&v.to_le_bytes())?;
        }
        for lvl in &self.levels {
            w.write_all(&(lvl.k_max as u64).to_le_bytes())?;
            for v in lvl.values.iter().chain(&lvl.tails) {
                w.write_all(&v.to_le_bytes())?;
            }
            for b in &lvl.binomials {
                w.write_all(&b.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != FIELD_MAGIC {
            return Err(Error::Format("not a coefficient field file".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != FIELD_VERSION {
            return Err(Error::Format("unsupported coefficient field version".into()));
        }
        r.read_exact(&mut b4)?;
        let j_max = i32::from_le_bytes(b4);
        let mut b8 = [0u8; 8];
        let mut u64_at = |r: &mut dyn Read| -> Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let rho = f64::from_bits(u64_at(&mut r)?);
        let m = u64_at(&mut r)? as usize;
        let draw_seed = SeedRecord { master_seed: u64_at(&mut r)?, draw_id: u64_at(&mut r)? };
        if !(0..=40).contains(&j_max) {
            return Err(Error::Format(format!("implausible j_max {j_max}")));
        }
        let mut levels = Vec::new();
        for j in 0..=j_max {
            let k_max = u64_at(&mut r)? as i64;
            let n = (2 * k_max + 1) as usize;
            let mut vals = Vec::with_capacity(2 * n);
            for _ in 0..2 * n {
                vals.push(f64::from_bits(u64_at(&mut r)?));
            }
            let tails = vals.split_off(n);
            let mut binomials = Vec::with_capacity(m);
            for _ in 0..m {
                r.read_exact(&mut b4)?;
                binomials.push(u32::from_le_bytes(b4));
            }
            levels.push(FieldLevel { j, k_max, values: vals, tails, binomials });
        }
        Ok(Self { j_max, rho, truncation: m, levels, draw_seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lepage::{mu_alpha_eps, zeta_density, LePageParams};
    use crate::meyer::in_r0;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn draw(m: usize, id: u64) -> LePageDraw {
        LePageParams::new(1.5, 0.5, m).unwrap().draw(42, id)
    }

    #[test]
    fn lambdas_vanish_off_annulus() {
        // 2^{-3}ζ = π/3
        let zeta = 8.0 * PI / 3.0;
        assert_eq!(lambdas(3, 5, zeta, 1.5, 0.5).unwrap(), (0.0, 0.0));
        assert!(matches!(lambdas(0, 0, 0.0, 1.5, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn lambdas_at_k0_match_complex_evaluation() {
        let (alpha, eps) = (1.5, 0.5);
        for (j, zeta) in [(0, 3.0), (2, -15.0), (5, 100.0), (1, 7.5)] {
            let omega = zeta / 2f64.powi(j);
            let c = zeta_density(zeta, eps).powf(-1.0 / alpha)
                * 2f64.powf(-j as f64 / alpha)
                * psi_hat(-omega);
            let (l0, l1) = lambdas(j, 0, zeta, alpha, eps).unwrap();
            assert!((l0 - c.re).abs() < 1e-14 * (1.0 + c.norm()));
            assert!((l1 - c.im).abs() < 1e-14 * (1.0 + c.norm()));
        }
    }

    #[test]
    fn single_term_and_zero_draw() {
        let d = draw(50, 0);
        let (l0, l1) = lambda_zeta(0, 1, &d.zetas[0], d.alpha, d.eps);
        let want = d.a_alpha * d.gammas[0].powf(-1.0 / d.alpha) * (l0 * d.g_re[0] - l1 * d.g_im[0]);
        assert_eq!(coeff_direct(0, 1, &d, 1).unwrap(), want);

        let mut off = d.clone();
        for z in off.zetas.iter_mut() {
            z.log_abs = 1e3; // far outside every annulus that is probed
        }
        assert_eq!(coeff_direct(3, 2, &off, 50).unwrap(), 0.0);
        let a = coeff_abel(3, 2, &off, 49).unwrap();
        assert_eq!((a.value, a.tail_estimate), (0.0, 0.0));
        assert!(coeff_direct(0, 0, &d, 51).is_err());
        assert!(coeff_abel(0, 0, &d, 50).is_err());
    }

    #[test]
    fn partial_sums_telescope() {
        let d = draw(300, 1);
        let (s0, s1) = partial_sums(1, -3, &d, 300).unwrap();
        assert_eq!((s0[0], s1[0]), (0.0, 0.0));
        for m in 1..=300 {
            let (l0, l1) = lambda_zeta(1, -3, &d.zetas[m - 1], d.alpha, d.eps);
            assert!((s0[m] - s0[m - 1] - l0 * d.g_re[m - 1]).abs() < 1e-12 * (1.0 + s0[m].abs()));
            assert!((s1[m] - s1[m - 1] - l1 * d.g_im[m - 1]).abs() < 1e-12 * (1.0 + s1[m].abs()));
        }
    }

    #[test]
    fn sparse_abel_matches_direct() {
        let d = draw(2001, 2);
        for j in [-3, 0, 4, 9] {
            let terms = LevelTerms::new(&d, j, 2000).unwrap();
            let vals = terms.abel_range(-600, 600);
            for (i, v) in vals.iter().enumerate().step_by(37) {
                let k = i as i64 - 600;
                let direct = coeff_direct(j, k, &d, 2000).unwrap();
                assert!((d.a_alpha * v - direct).abs() < 1e-10 * (1.0 + direct.abs()), "j={j} k={k}");
            }
        }
    }

    #[test]
    fn binomial_counts_are_monotone() {
        let d = draw(1000, 3);
        for j in 0..10 {
            let b = binomial_counts(j, &d, 1000).unwrap();
            assert!(b[0] <= 1);
            assert!(b.windows(2).all(|w| w[1] >= w[0] && w[1] - w[0] <= 1));
            assert!(b.iter().enumerate().all(|(i, &c)| c as usize <= i + 1));
        }
    }

    #[test]
    fn field_window_sizes_and_cap() {
        let d = draw(1001, 4);
        let f = coeff_field(&d, 4, 2.5, 1000, DEFAULT_FIELD_CAP).unwrap();
        assert_eq!(f.levels[0].values.len(), 2 * 2 + 1);
        assert_eq!(f.levels[3].values.len(), 2 * 20 + 1);
        assert_eq!(f.get(0, 2), Some(f.levels[0].values[4]));
        assert_eq!(f.get(0, 3), None);
        assert!(matches!(coeff_field(&d, 4, 2.5, 1000, 1000), Err(Error::Resource(_))));
        let direct = coeff_direct(2, -3, &d, 1000).unwrap();
        assert!((f.get(2, -3).unwrap() - direct).abs() < 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn field_roundtrip_and_csv() {
        let d = draw(201, 5);
        let f = coeff_field(&d, 3, 1.0, 200, DEFAULT_FIELD_CAP).unwrap();
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        assert_eq!(CoeffField::read_from(buf.as_slice()).unwrap(), f);
        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("j,k,value,tail_estimate"));
        assert_eq!(text.lines().count(), 1 + 3 + 5 + 9 + 17);
    }

    proptest! {
        #[test]
        fn lambda_bounded_by_mu(j in 0i32..20, k in -5000i64..5000, log_abs in -5.0f64..20.0, neg in any::<bool>()) {
            let (alpha, eps) = (1.5, 0.5);
            let mu = mu_alpha_eps(alpha, eps).unwrap();
            let z = Zeta { sign: if neg { -1.0 } else { 1.0 }, log_abs };
            let (l0, l1) = lambda_zeta(j, k, &z, alpha, eps);
            let beta = in_annulus(&z, j) as u8 as f64;
            let bound = mu * (1.0 + j as f64).powf((1.0 + eps) / alpha) * beta;
            prop_assert!(l0.abs() <= bound * (1.0 + 1e-9) && l1.abs() <= bound * (1.0 + 1e-9));
        }

        #[test]
        fn at_most_two_levels_active(log_abs in -10.0f64..20.0) {
            let z = Zeta { sign: 1.0, log_abs };
            let levels: Vec<i32> = (-20..40).filter(|&j| in_annulus(&z, j)).collect();
            prop_assert!(levels.len() <= 2);
            if levels.len() == 2 {
                prop_assert_eq!(levels[1], levels[0] + 1);
            }
            for &j in &levels {
                prop_assert!(in_r0(log_abs.exp() / 2f64.powi(j)) || (log_abs.exp() / 2f64.powi(j) - crate::meyer::R0_LO).abs() < 1e-9);
            }
        }
    }
}
