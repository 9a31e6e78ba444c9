//! Frequency-domain Meyer mother wavelet `ψ̂` and the test spectrum `θ̂`.
//!
//! Both are built from the degree-7 ramp `ν(x) = x⁴(35 − 84x + 70x² − 20x³)`,
//! which is C³ at the junctions and satisfies `ν(x) + ν(1 − x) = 1`.
//! The time-domain wavelet is never materialized; everything downstream works
//! with `ψ̂` directly.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;

/// Lower edge of the Meyer annulus `R₀`, `2π/3`.
pub const R0_LO: f64 = 2.0 * PI / 3.0;
/// Upper edge of the Meyer annulus `R₀`, `8π/3`.
pub const R0_HI: f64 = 8.0 * PI / 3.0;
const R0_MID: f64 = 4.0 * PI / 3.0;
const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

/// Lower edge of the `θ̂` support.
pub const THETA_LO: f64 = 0.5;
/// Upper edge of the `θ̂` support.
pub const THETA_HI: f64 = 1.0;

/// Coefficients of `ν` in increasing powers of `x`.
pub const RAMP_COEFFS: [f64; 8] = [0.0, 0.0, 0.0, 0.0, 35.0, -84.0, 70.0, -20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveletKind {
    MeyerPsi,
    ThetaBump,
}

/// Spectral description of one of the two compactly supported spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub kind: WaveletKind,
    pub support_lo: f64,
    pub support_hi: f64,
    pub aux_poly_coeffs: Vec<f64>,
}

impl WaveletSpec {
    pub fn meyer_psi() -> Self {
        Self {
            kind: WaveletKind::MeyerPsi,
            support_lo: R0_LO,
            support_hi: R0_HI,
            aux_poly_coeffs: RAMP_COEFFS.to_vec(),
        }
    }

    pub fn theta_bump() -> Self {
        Self {
            kind: WaveletKind::ThetaBump,
            support_lo: THETA_LO,
            support_hi: THETA_HI,
            aux_poly_coeffs: RAMP_COEFFS.to_vec(),
        }
    }

    /// Spectrum value at `xi`; purely real for the θ bump.
    pub fn eval(&self, xi: f64) -> Complex64 {
        match self.kind {
            WaveletKind::MeyerPsi => psi_hat(xi),
            WaveletKind::ThetaBump => Complex64::new(theta_hat(xi), 0.0),
        }
    }

    /// Checks `ν(0) = 0`, `ν(1) = 1` and `ν(x) + ν(1 − x) = 1` on an `n`-point grid.
    pub fn check_ramp(&self, n: usize) -> Result<()> {
        let ramp = |x: f64| horner(&self.aux_poly_coeffs, x);
        if ramp(0.0) != 0.0 || ramp(1.0) != 1.0 {
            return Err(Error::Numeric("ramp endpoints are not 0 and 1".into()));
        }
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let s = ramp(x) + ramp(1.0 - x);
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::Numeric(format!("ramp symmetry fails at x={x}: {s}")));
            }
        }
        Ok(())
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// The smooth ramp `ν` on `[0, 1]`.
pub fn nu_poly(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("ramp argument {x} outside [0, 1]")));
    }
    Ok(ramp(x))
}

#[inline]
fn ramp(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let x2 = x * x;
    x2 * x2 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)))
}

/// Modulus `|ψ̂(ξ)|` as a function of `|ξ|`.
#[inline]
pub fn meyer_modulus(abs_xi: f64) -> f64 {
    if !(R0_LO..=R0_HI).contains(&abs_xi) {
        0.0
    } else if abs_xi <= R0_MID {
        (FRAC_PI_2 * ramp(3.0 * abs_xi / TWO_PI - 1.0)).sin()
    } else {
        // cos(π/2·ν(x)) written as sin(π/2·ν(1 − x)) so the outer edge is an exact zero
        (FRAC_PI_2 * ramp(2.0 - 3.0 * abs_xi / FOUR_PI)).sin()
    }
}

/// Meyer spectrum `ψ̂(ξ) = e^{iξ/2} b(|ξ|)`; the phase makes `ψ` real.
#[inline]
pub fn psi_hat(xi: f64) -> Complex64 {
    let b = meyer_modulus(xi.abs());
    if b == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (s, c) = (0.5 * xi).sin_cos();
    Complex64::new(b * c, b * s)
}

/// True when `|ξ|` lies in the closed annulus `R₀`.
#[inline]
pub fn in_r0(xi: f64) -> bool {
    (R0_LO..=R0_HI).contains(&xi.abs())
}

/// Even, real test spectrum supported in `1/2 ≤ |ξ| ≤ 1`, with peak 1 at `|ξ| = 3/4`.
#[inline]
pub fn theta_hat(xi: f64) -> f64 {
    let a = xi.abs();
    if !(THETA_LO..=THETA_HI).contains(&a) {
        return 0.0;
    }
    let x = 2.0 * a - 1.0;
    // sin(πν(x)) = sin(πν(1 − x)); evaluating the nearer end keeps both edges exactly zero
    let s = (PI * ramp(x.min(1.0 - x))).sin();
    s * s
}

/// Time-domain `θ(t) = (1/2π) ∫ e^{itξ} θ̂(ξ) dξ`, evaluated by composite
/// Gauss–Legendre quadrature on the support.
#[derive(Debug, Clone)]
pub struct ThetaTime {
    rule: GaussLegendre,
}

impl Default for ThetaTime {
    fn default() -> Self {
        Self::new()
    }
}

impl ThetaTime {
    pub fn new() -> Self {
        Self { rule: GaussLegendre::new(16) }
    }

    fn integrate(&self, t: f64, panels: usize) -> f64 {
        // θ̂ is even, so only the cosine part survives.
        self.rule
            .integrate(THETA_LO, THETA_HI, panels, |xi| theta_hat(xi) * (t * xi).cos())
            / PI
    }

    /// Evaluates `θ(t)`, cross-checking against a rule with twice the panels.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("θ evaluated at non-finite time {t}")));
        }
        let panels = 4 + (t.abs() / TWO_PI).ceil() as usize;
        let coarse = self.integrate(t, panels);
        let fine = self.integrate(t, 2 * panels);
        let tol = 1e-13;
        if (coarse - fine).abs() > tol {
            return Err(Error::Numeric(format!(
                "θ quadrature did not converge at t={t}: {coarse} vs {fine} with {panels} panels"
            )));
        }
        Ok(fine)
    }
}

/// Convenience wrapper around [`ThetaTime::eval`].
pub fn theta_time(t: f64) -> Result<f64> {
    ThetaTime::new().eval(t)
}
