//! Tabulated fractional kernel `Ψ(y) = ∫ e^{iyξ} ψ̂(ξ) |ξ|^{-H-1/α} dξ` and its derivative.
//!
//! Values are computed once by composite Gauss–Legendre quadrature on the
//! Meyer annulus and then served by cubic Hermite interpolation, which uses
//! the stored derivative so that the interpolant is C¹.
//!
//! # Cache file layout
//!
//! All integers and floats are little-endian.
//!
//! | offset | size  | content                               |
//! |--------|-------|---------------------------------------|
//! | 0      | 8     | magic `b"HFSMKRN\0"`                  |
//! | 8      | 4     | format version (`u32`, currently 1)   |
//! | 12     | 8 × 6 | α, H, Y, Δy, ρ̃, decay constant (`f64`) |
//! | 60     | 8     | node count `n` (`u64`)                |
//! | 68     | 8n    | Ψ at the nodes                        |
//! | 68+8n  | 8n    | Ψ′ at the nodes                       |

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{check_alpha_open, check_hurst, Error, Result};
use crate::meyer::{meyer_modulus, R0_HI, R0_LO};
use crate::quad::{GaussLegendre, Neumaier};

const MAGIC: &[u8; 8] = b"HFSMKRN\0";
const VERSION: u32 = 1;
const NODES_PER_PANEL: usize = 6;
const IMAG_TOL: f64 = 1e-10;

/// Quadrature-only evaluator of `Ψ` and `Ψ′` at arbitrary `y`.
#[derive(Debug, Clone)]
pub struct KernelQuadrature {
    alpha: f64,
    hurst: f64,
    /// Positive-half nodes `ξ` with weights `w·b(ξ)·ξ^{-H-1/α}`.
    nodes: Vec<(f64, f64)>,
}

impl KernelQuadrature {
    /// Builds a rule fine enough for `|y| ≤ max_abs_y`; `refine` multiplies the panel count.
    pub fn new(alpha: f64, hurst: f64, max_abs_y: f64, refine: usize) -> Result<Self> {
        check_alpha_open(alpha)?;
        check_hurst(hurst)?;
        if !(max_abs_y >= 0.0 && max_abs_y.is_finite()) || refine == 0 {
            return Err(Error::Parameter(format!(
                "invalid quadrature extent {max_abs_y} or refinement {refine}"
            )));
        }
        let power = hurst + 1.0 / alpha;
        // The phase e^{iξ/2} shifts the oscillation frequency from y to y + 1/2.
        let width = std::f64::consts::PI / (4.0 * (max_abs_y + 0.5).max(1.0));
        let rule = GaussLegendre::new(NODES_PER_PANEL);
        let breaks = [R0_LO, 4.0 * std::f64::consts::PI / 3.0, R0_HI];
        let mut nodes = Vec::new();
        for seg in breaks.windows(2) {
            let panels = ((seg[1] - seg[0]) / width).ceil() as usize * refine;
            rule.for_each_node(seg[0], seg[1], panels, |xi, w| {
                nodes.push((xi, w * meyer_modulus(xi) * xi.powf(-power)));
            });
        }
        Ok(Self { alpha, hurst, nodes })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Returns `(Ψ(y), Ψ′(y))`, failing if the imaginary residue exceeds tolerance.
    pub fn eval(&self, y: f64) -> Result<(f64, f64)> {
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        let mut dre = Neumaier::default();
        let mut dim = Neumaier::default();
        for &(xi, w) in &self.nodes {
            // ξ > 0 contributes e^{i(y+1/2)ξ}; its mirror −ξ contributes the conjugate.
            for sgn in [1.0, -1.0] {
                let x = sgn * xi;
                let (s, c) = ((y + 0.5) * x).sin_cos();
                re.add(w * c);
                im.add(w * s);
                // iξ e^{iφ} = −ξ sin φ + i ξ cos φ
                dre.add(-w * x * s);
                dim.add(w * x * c);
            }
        }
        let (re, im, dre, dim) = (re.sum(), im.sum(), dre.sum(), dim.sum());
        if im.abs() > IMAG_TOL || dim.abs() > IMAG_TOL {
            return Err(Error::Numeric(format!(
                "kernel quadrature has imaginary residue {im:e} / {dim:e} at y={y}"
            )));
        }
        Ok((re, dre))
    }
}

/// `Ψ` and `Ψ′` on the symmetric grid `y_i = −Y + iΔy`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub alpha: f64,
    pub hurst: f64,
    pub grid_half_width: f64,
    pub grid_step: f64,
    pub rho_tilde: f64,
    pub psi_values: Vec<f64>,
    pub psi_prime_values: Vec<f64>,
    pub decay_constant: f64,
}

fn grid_len(grid_half_width: f64, grid_step: f64) -> Result<usize> {
    if !(grid_half_width > 0.0 && grid_step > 0.0)
        || !grid_half_width.is_finite()
        || !grid_step.is_finite()
    {
        return Err(Error::Parameter(format!(
            "kernel grid needs positive extent and step, got Y={grid_half_width}, Δy={grid_step}"
        )));
    }
    let cells = 2.0 * grid_half_width / grid_step;
    let rounded = cells.round();
    if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::Parameter(format!(
            "kernel grid step {grid_step} does not divide 2Y = {}",
            2.0 * grid_half_width
        )));
    }
    if rounded > 1e8 {
        return Err(Error::Resource(format!("kernel grid of {rounded} cells is too large")));
    }
    Ok(rounded as usize + 1)
}

/// Builds the table with the default quadrature resolution.
pub fn build_table(
    alpha: f64,
    hurst: f64,
    grid_half_width: f64,
    grid_step: f64,
    rho_tilde: f64,
) -> Result<KernelTable> {
    build_table_refined(alpha, hurst, grid_half_width, grid_step, rho_tilde, 1)
}

/// Builds the table with `refine` times the default number of quadrature panels.
pub fn build_table_refined(
    alpha: f64,
    hurst: f64,
    grid_half_width: f64,
    grid_step: f64,
    rho_tilde: f64,
    refine: usize,
) -> Result<KernelTable> {
    let n = grid_len(grid_half_width, grid_step)?;
    if !(rho_tilde >= 0.0 && rho_tilde.is_finite()) {
        return Err(Error::Parameter(format!("ρ̃ must be nonnegative, got {rho_tilde}")));
    }
    let quad = KernelQuadrature::new(alpha, hurst, grid_half_width, refine)?;
    let pairs: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| quad.eval(-grid_half_width + i as f64 * grid_step))
        .collect::<Result<_>>()?;
    let (psi_values, psi_prime_values) = pairs.into_iter().unzip();
    let mut table = KernelTable {
        alpha,
        hurst,
        grid_half_width,
        grid_step,
        rho_tilde,
        psi_values,
        psi_prime_values,
        decay_constant: 0.0,
    };
    table.decay_constant = table.decay_constant_at(rho_tilde);
    Ok(table)
}

/// Precomputed Hermite weights for one evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    /// Left node index; the cell is `[idx, idx + 1]`.
    pub idx: isize,
    /// Weights for `Ψ_i, Ψ′_i, Ψ_{i+1}, Ψ′_{i+1}`.
    pub w: [f64; 4],
}

impl KernelTable {
    pub fn len(&self) -> usize {
        self.psi_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi_values.is_empty()
    }

    /// Grid node `y_i`.
    pub fn node(&self, i: usize) -> f64 {
        -self.grid_half_width + i as f64 * self.grid_step
    }

    /// True when `y` lies outside the tabulated range and is evaluated as 0.
    pub fn is_far_field(&self, y: f64) -> bool {
        y.abs() > self.grid_half_width
    }

    /// Bound on the error committed by the far-field zero rule.
    pub fn far_field_bias(&self) -> f64 {
        self.decay_constant * (1.0 + self.grid_half_width).powi(-3)
    }

    /// `sup_i (|Ψ(y_i)| + |Ψ′(y_i)|)(1 + 2ρ + |y_i|)³`.
    pub fn decay_constant_at(&self, rho: f64) -> f64 {
        (0..self.len())
            .map(|i| {
                let y = self.node(i);
                (self.psi_values[i].abs() + self.psi_prime_values[i].abs())
                    * (1.0 + 2.0 * rho + y.abs()).powi(3)
            })
            .fold(0.0, f64::max)
    }

    /// Hermite stencil for `y`, or `None` in the far field.
    #[inline]
    pub fn stencil(&self, y: f64) -> Option<Stencil> {
        if self.is_far_field(y) {
            return None;
        }
        let pos = (y + self.grid_half_width) / self.grid_step;
        let last = self.len() as isize - 2;
        let idx = (pos.floor() as isize).clamp(0, last);
        let s = pos - idx as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h = self.grid_step;
        Some(Stencil {
            idx,
            w: [
                2.0 * s3 - 3.0 * s2 + 1.0,
                h * (s3 - 2.0 * s2 + s),
                -2.0 * s3 + 3.0 * s2,
                h * (s3 - s2),
            ],
        })
    }

    /// Applies a stencil shifted by `shift` nodes; zero if the shifted cell leaves the grid.
    #[inline]
    pub fn apply(&self, st: &Stencil, shift: isize) -> f64 {
        let i = st.idx + shift;
        if i < 0 || i + 1 >= self.len() as isize {
            return 0.0;
        }
        let i = i as usize;
        st.w[0] * self.psi_values[i]
            + st.w[1] * self.psi_prime_values[i]
            + st.w[2] * self.psi_values[i + 1]
            + st.w[3] * self.psi_prime_values[i + 1]
    }

    /// Interpolated `Ψ(y)`; zero beyond the grid.
    pub fn eval_psi(&self, y: f64) -> f64 {
        match self.stencil(y) {
            Some(st) => self.apply(&st, 0),
            None => 0.0,
        }
    }

    /// Derivative of the Hermite interpolant; zero beyond the grid.
    pub fn eval_psi_prime(&self, y: f64) -> f64 {
        if self.is_far_field(y) {
            return 0.0;
        }
        let pos = (y + self.grid_half_width) / self.grid_step;
        let i = (pos.floor() as usize).min(self.len() - 2);
        let s = pos - i as f64;
        let h = self.grid_step;
        let d00 = 6.0 * s * s - 6.0 * s;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d11 = 3.0 * s * s - 2.0 * s;
        (d00 * (self.psi_values[i] - self.psi_values[i + 1])) / h
            + d10 * self.psi_prime_values[i]
            + d11 * self.psi_prime_values[i + 1]
    }

    /// Largest `|Ψ′|` over the grid.
    pub fn sup_psi_prime(&self) -> f64 {
        self.psi_prime_values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of grid nodes per unit of `y`, if that is an integer.
    pub fn nodes_per_unit(&self) -> Option<usize> {
        let r = 1.0 / self.grid_step;
        (r.fract() == 0.0 && r >= 1.0).then_some(r as usize)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [
            self.alpha,
            self.hurst,
            self.grid_half_width,
            self.grid_step,
            self.rho_tilde,
            self.decay_constant,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for v in self.psi_values.iter().chain(&self.psi_prime_values) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a kernel table file".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported kernel table version {version}")));
        }
        let mut f = || -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let head = [f()?, f()?, f()?, f()?, f()?, f()?];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n != grid_len(head[2], head[3])? {
            return Err(Error::Format("kernel table node count mismatch".into()));
        }
        let mut body = vec![0u8; 16 * n];
        r.read_exact(&mut body)?;
        let vals: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let (psi, psi_prime) = vals.split_at(n);
        Ok(Self {
            alpha: head[0],
            hurst: head[1],
            grid_half_width: head[2],
            grid_step: head[3],
            rho_tilde: head[4],
            decay_constant: head[5],
            psi_values: psi.to_vec(),
            psi_prime_values: psi_prime.to_vec(),
        })
    }
}

/// Cache file name for the key `(α, H, Y, Δy)`.
pub fn cache_file_name(alpha: f64, hurst: f64, grid_half_width: f64, grid_step: f64) -> String {
    format!(
        "kernel-{:016x}-{:016x}-{:016x}-{:016x}.bin",
        alpha.to_bits(),
        hurst.to_bits(),
        grid_half_width.to_bits(),
        grid_step.to_bits()
    )
}

/// Loads a table from `cache_dir` if present, otherwise builds and stores it.
/// The decay constant is recomputed for the requested `ρ̃`.
pub fn load_or_build(
    cache_dir: Option<&Path>,
    alpha: f64,
    hurst: f64,
    grid_half_width: f64,
    grid_step: f64,
    rho_tilde: f64,
) -> Result<KernelTable> {
    let Some(dir) = cache_dir else {
        return build_table(alpha, hurst, grid_half_width, grid_step, rho_tilde);
    };
    let path: PathBuf = dir.join(cache_file_name(alpha, hurst, grid_half_width, grid_step));
    if let Ok(bytes) = fs::read(&path) {
        if let Ok(mut t) = KernelTable::read_from(bytes.as_slice()) {
            if t.alpha == alpha
                && t.hurst == hurst
                && t.grid_half_width == grid_half_width
                && t.grid_step == grid_step
            {
                t.rho_tilde = rho_tilde;
                t.decay_constant = t.decay_constant_at(rho_tilde);
                return Ok(t);
            }
        }
    }
    let t = build_table(alpha, hurst, grid_half_width, grid_step, rho_tilde)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    let mut buf = Vec::with_capacity(68 + 16 * t.len());
    t.write_to(&mut buf)?;
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, &path)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> KernelTable {
        build_table(1.5, 0.5, 16.0, 1.0 / 16.0, 0.5).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(build_table(2.5, 0.5, 8.0, 0.125, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(build_table(1.5, 1.0, 8.0, 0.125, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(build_table(1.5, 0.5, 0.0, 0.125, 0.5), Err(Error::Parameter(_))));
        assert!(matches!(build_table(1.5, 0.5, 8.0, 0.3, 0.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn nodes_return_stored_values() {
        let t = small();
        for i in [0, 1, 100, t.len() / 2, t.len() - 2] {
            let y = t.node(i);
            assert_eq!(t.eval_psi(y), t.psi_values[i]);
        }
        assert_eq!(t.eval_psi(t.grid_half_width), *t.psi_values.last().unwrap());
    }

    #[test]
    fn far_field_is_zero() {
        let t = small();
        let y = t.grid_half_width + 1.0;
        assert!(t.is_far_field(y));
        assert_eq!(t.eval_psi(y), 0.0);
        assert_eq!(t.eval_psi(-y), 0.0);
        assert_eq!(t.eval_psi_prime(y), 0.0);
        assert!(t.far_field_bias() > 0.0);
    }

    #[test]
    fn origin_matches_independent_quadrature() {
        // Ψ(0) = 2∫ b(ξ) ξ^{-p} cos(ξ/2) dξ on the annulus, by a fine midpoint rule.
        let t = small();
        let p = 0.5 + 1.0 / 1.5;
        let n = 400_000;
        let h = (R0_HI - R0_LO) / n as f64;
        let direct: f64 = (0..n)
            .map(|i| {
                let xi = R0_LO + (i as f64 + 0.5) * h;
                2.0 * meyer_modulus(xi) * xi.powf(-p) * (0.5 * xi).cos() * h
            })
            .sum();
        let mid = t.len() / 2;
        assert_eq!(t.node(mid), 0.0);
        assert!((t.psi_values[mid] - direct).abs() < 1e-9 * direct.abs());
    }

    #[test]
    fn cache_roundtrip_is_exact() {
        let t = build_table(1.2, 0.3, 4.0, 0.25, 1.0).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 68 + 16 * t.len());
        let back = KernelTable::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        buf[0] = b'X';
        assert!(matches!(KernelTable::read_from(buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn load_or_build_uses_cache() {
        let dir = tempfile::tempdir().unwrap();
        let a = load_or_build(Some(dir.path()), 1.5, 0.5, 4.0, 0.25, 0.5).unwrap();
        let name = cache_file_name(1.5, 0.5, 4.0, 0.25);
        assert!(dir.path().join(&name).exists());
        let b = load_or_build(Some(dir.path()), 1.5, 0.5, 4.0, 0.25, 2.0).unwrap();
        assert_eq!(a.psi_values, b.psi_values);
        assert_eq!(b.decay_constant, b.decay_constant_at(2.0));
        assert!(b.decay_constant > a.decay_constant);
    }

    #[test]
    fn shifted_stencil_matches_direct_eval() {
        let t = small();
        let per = t.nodes_per_unit().unwrap() as isize;
        let y = 0.3217;
        let st = t.stencil(y).unwrap();
        for k in -5..=5 {
            let direct = t.eval_psi(y - k as f64);
            let shifted = t.apply(&st, -k * per);
            assert!((direct - shifted).abs() <= 1e-15 * (1.0 + direct.abs()));
        }
    }
}
