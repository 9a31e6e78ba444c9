//! Sample paths of HFSM from the truncated wavelet series.
//!
//! For each level `j ∈ [j_low, j_high]` the path receives
//! `2^{-jH} Σ Re(ε_{j,k}) (Ψ(2^j t − k) − Ψ(−k))` over the `k` with
//! `|2^j t − k| ≤ k_cut` or `|k| ≤ k_cut`. Both kernel values come from the same
//! interpolation arithmetic, so every summand vanishes exactly at `t = 0`, and the
//! set of `k` does not depend on `t` at levels where `2^j ρ̃ < 1`. Terms are routed to three components: `X⁻` (`j < 0`), `X₁⁺`
//! (`j ≥ 0`, `|k| ≤ 2^j(ρ̃+1)`) and `X₂⁺` (the remaining `j ≥ 0` terms).

use rayon::prelude::*;

use crate::coeffs::LevelTerms;
use crate::error::{param, Error, Result};
use crate::kernel::{KernelTable, Stencil};
use crate::lepage::{LePageDraw, LePageParams};

/// Parameters of a synthesis run.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub alpha: f64,
    pub hurst: f64,
    pub eps: f64,
    /// Grid step `Δt`; the grid is `{iΔt : |iΔt| ≤ ρ̃}`.
    pub dt: f64,
    pub j_low: i32,
    pub j_high: i32,
    /// Kernel cutoff in units of `y = 2^j t`.
    pub k_cut: f64,
    /// LePage truncation `M`.
    pub truncation: usize,
    pub rho_tilde: f64,
    pub kernel_half_width: f64,
    pub kernel_step: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            hurst: 0.5,
            eps: 0.5,
            dt: 2f64.powi(-14),
            j_low: -8,
            j_high: 12,
            k_cut: 16.0,
            truncation: 10_000,
            rho_tilde: 0.5,
            kernel_half_width: 64.0,
            kernel_step: 1.0 / 64.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        LePageParams::new(self.alpha, self.eps, self.truncation)?;
        crate::error::check_hurst(self.hurst)?;
        if self.j_low > -1 || self.j_high < 0 {
            return param(format!(
                "levels must satisfy j_low <= -1 <= 0 <= j_high, got [{}, {}]",
                self.j_low, self.j_high
            ));
        }
        if self.j_high > 30 || self.j_low < -60 {
            return param(format!("level range [{}, {}] is implausible", self.j_low, self.j_high));
        }
        if !(self.k_cut >= 8.0 && self.k_cut.is_finite()) {
            return param(format!("k_cut must be at least 8, got {}", self.k_cut));
        }
        if !(self.dt > 0.0 && self.dt <= 2f64.powi(-self.j_high)) {
            return param(format!(
                "time step {} must be positive and at most 2^-j_high = {}",
                self.dt,
                2f64.powi(-self.j_high)
            ));
        }
        if !(self.rho_tilde > 0.0 && self.rho_tilde.is_finite()) {
            return param(format!("rho_tilde must be positive, got {}", self.rho_tilde));
        }
        let half = self.rho_tilde / self.dt;
        if (half - half.round()).abs() > 1e-9 * half {
            return param(format!(
                "rho_tilde {} is not a multiple of the time step {}",
                self.rho_tilde, self.dt
            ));
        }
        if half.round() > 5e7 {
            return Err(Error::Resource(format!("{} grid points per path is too many", 2.0 * half)));
        }
        if self.kernel_half_width < self.k_cut {
            return param(format!(
                "kernel table half-width {} must cover k_cut {}",
                self.kernel_half_width, self.k_cut
            ));
        }
        Ok(())
    }

    /// Index of `t = 0`; also the number of points on each side of it.
    pub fn origin_index(&self) -> usize {
        (self.rho_tilde / self.dt).round() as usize
    }

    pub fn n_points(&self) -> usize {
        2 * self.origin_index() + 1
    }

    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.origin_index() as f64) * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points()).map(|i| self.time(i)).collect()
    }

    fn check_table(&self, table: &KernelTable) -> Result<()> {
        if table.alpha != self.alpha || table.hurst != self.hurst {
            return param(format!(
                "kernel table built for (α, H) = ({}, {}) but synthesis uses ({}, {})",
                table.alpha, table.hurst, self.alpha, self.hurst
            ));
        }
        if table.grid_half_width < self.k_cut {
            return param("kernel table does not cover the cutoff");
        }
        Ok(())
    }
}

/// `K_j(ρ̃) = {k : |k| ≤ 2^j(ρ̃+1)}` as an inclusive interval, for `j ≥ 0`.
pub fn k_window(j: i32, rho_tilde: f64) -> Result<(i64, i64)> {
    if j < 0 {
        return param(format!("K_j is defined for j >= 0, got {j}"));
    }
    let k = (2f64.powi(j) * (rho_tilde + 1.0)).floor() as i64;
    Ok((-k, k))
}

/// The three-way split of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub low: Vec<f64>,
    pub high1: Vec<f64>,
    pub high2: Vec<f64>,
}

/// One synthesized path.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPath {
    pub values: Vec<f64>,
    pub components: Components,
}

#[derive(Clone, Copy)]
enum Part {
    Low = 0,
    High1 = 1,
    High2 = 2,
}

/// Synthesizes the path driven by `draw`.
pub fn synth_path(draw: &LePageDraw, cfg: &SynthConfig, table: &KernelTable) -> Result<SynthPath> {
    cfg.validate()?;
    cfg.check_table(table)?;
    if draw.alpha != cfg.alpha || draw.eps != cfg.eps || draw.truncation < cfg.truncation {
        return param("LePage draw is inconsistent with the synthesis configuration");
    }
    let n = cfg.n_points();
    let mut parts = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for j in cfg.j_low..=cfg.j_high {
        add_level(draw, cfg, table, j, &mut parts)?;
    }
    let [low, high1, high2] = parts;
    let values: Vec<f64> = (0..n).map(|i| low[i] + high1[i] + high2[i]).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite path value at t={}", cfg.time(i))));
    }
    Ok(SynthPath { values, components: Components { low, high1, high2 } })
}

fn add_level(
    draw: &LePageDraw,
    cfg: &SynthConfig,
    table: &KernelTable,
    j: i32,
    parts: &mut [Vec<f64>; 3],
) -> Result<()> {
    let scale = 2f64.powi(j);
    let k_ext = (scale * cfg.rho_tilde + cfg.k_cut).ceil() as i64 + 1;
    let terms = LevelTerms::new(draw, j, cfg.truncation)?;
    if terms.active.is_empty() {
        return Ok(());
    }
    let amp = draw.a_alpha * 2f64.powf(-(j as f64) * cfg.hurst);
    let coeffs: Vec<f64> = terms.abel_range(-k_ext, k_ext).into_iter().map(|c| amp * c).collect();
    if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite coefficient at j={j}, k={}",
            i as i64 - k_ext
        )));
    }
    let k1 = if j >= 0 { k_window(j, cfg.rho_tilde)?.1 } else { -1 };
    let part_of = |k: i64| -> Part {
        if j < 0 {
            Part::Low
        } else if k.abs() <= k1 {
            Part::High1
        } else {
            Part::High2
        }
    };
    let per = table.nodes_per_unit();
    let origin = table.stencil(0.0);
    let psi = |st: &Option<Stencil>, y: f64, k: i64| -> f64 {
        match (per, st) {
            (Some(per), Some(st)) => table.apply(st, -(k as isize) * per as isize),
            _ => table.eval_psi(y - k as f64),
        }
    };
    // c_k Ψ(−k), produced by the same arithmetic as c_k Ψ(y − k) at y = 0
    let anchor: Vec<f64> = (-k_ext..=k_ext)
        .map(|k| coeffs[(k + k_ext) as usize] * psi(&origin, 0.0, k))
        .collect();
    let kc = cfg.k_cut.floor() as i64;
    // Σ c_k (Ψ(y − k) − Ψ(−k)) over |y − k| ≤ k_cut or |k| ≤ k_cut, split by component.
    let eval = |y: f64| -> [f64; 3] {
        let mut acc = [0.0; 3];
        let st = table.stencil(y);
        let mut add = |k: i64| {
            let i = (k + k_ext) as usize;
            acc[part_of(k) as usize] += coeffs[i] * psi(&st, y, k) - anchor[i];
        };
        let lo = (y - cfg.k_cut).ceil() as i64;
        let hi = (y + cfg.k_cut).floor() as i64;
        if lo > kc + 1 || hi < -kc - 1 {
            (-kc..=kc).for_each(&mut add);
            (lo..=hi).for_each(&mut add);
        } else {
            (lo.min(-kc)..=hi.max(kc)).for_each(&mut add);
        }
        acc
    };
    let i0 = cfg.origin_index();
    for i in 0..cfg.n_points() {
        let y = scale * ((i as f64 - i0 as f64) * cfg.dt);
        let f = eval(y);
        for p in 0..3 {
            parts[p][i] += f[p];
        }
    }
    Ok(())
}

/// Many independent paths sharing one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub config: SynthConfig,
    pub master_seed: u64,
    pub paths: Vec<Vec<f64>>,
    /// Draw id of each path; the RNG streams of path `i` derive from it.
    pub seeds: Vec<u64>,
    pub components: Option<Vec<Components>>,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn n_points(&self) -> usize {
        self.config.n_points()
    }

    /// Values of every path at grid index `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p[i]).collect()
    }
}

/// Default cap on the memory held by an ensemble, in bytes.
pub const DEFAULT_ENSEMBLE_CAP: usize = 3 << 30;

/// Synthesizes `n_paths` paths with draw ids `0..n_paths`.
pub fn ensemble(
    cfg: &SynthConfig,
    n_paths: usize,
    master_seed: u64,
    table: &KernelTable,
    keep_components: bool,
    mem_cap: usize,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return param("an ensemble needs at least one path");
    }
    cfg.validate()?;
    cfg.check_table(table)?;
    let per_path = cfg.n_points() * 8 * if keep_components { 4 } else { 1 };
    if (n_paths as f64) * (per_path as f64) > mem_cap as f64 {
        return Err(Error::Resource(format!(
            "{n_paths} paths of {} points exceed the {mem_cap}-byte cap; at most {} fit",
            cfg.n_points(),
            mem_cap / per_path
        )));
    }
    let params = LePageParams::new(cfg.alpha, cfg.eps, cfg.truncation)?;
    let results: Vec<SynthPath> = (0..n_paths as u64)
        .into_par_iter()
        .map(|id| synth_path(&params.draw(master_seed, id), cfg, table))
        .collect::<Result<_>>()?;
    let mut paths = Vec::with_capacity(n_paths);
    let mut comps = keep_components.then(|| Vec::with_capacity(n_paths));
    for r in results {
        paths.push(r.values);
        if let Some(c) = comps.as_mut() {
            c.push(r.components);
        }
    }
    Ok(PathEnsemble {
        config: cfg.clone(),
        master_seed,
        paths,
        seeds: (0..n_paths as u64).collect(),
        components: comps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_table;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            dt: 2f64.powi(-8),
            j_low: -3,
            j_high: 6,
            truncation: 2000,
            kernel_half_width: 32.0,
            ..SynthConfig::default()
        }
    }

    fn table(cfg: &SynthConfig) -> KernelTable {
        build_table(cfg.alpha, cfg.hurst, cfg.kernel_half_width, cfg.kernel_step, cfg.rho_tilde)
            .unwrap()
    }

    #[test]
    fn k_window_examples() {
        assert_eq!(k_window(0, 1.0).unwrap(), (-2, 2));
        let (lo, hi) = k_window(5, 0.5).unwrap();
        assert_eq!(hi - lo + 1, 2 * (32.0f64 * 1.5).floor() as i64 + 1);
        assert!(k_window(-1, 0.5).is_err());
    }

    #[test]
    fn validation() {
        assert!(SynthConfig::default().validate().is_ok());
        let bad = [
            SynthConfig { j_low: 0, ..SynthConfig::default() },
            SynthConfig { k_cut: 4.0, ..SynthConfig::default() },
            SynthConfig { dt: 2f64.powi(-10), ..SynthConfig::default() },
            SynthConfig { alpha: 2.5, ..SynthConfig::default() },
            SynthConfig { rho_tilde: 0.3, dt: 0.25, j_high: 2, ..SynthConfig::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Parameter(_))), "{c:?}");
        }
    }

    #[test]
    fn origin_is_exactly_zero_and_components_add_up() {
        let cfg = small_cfg();
        let t = table(&cfg);
        let p = LePageParams::new(cfg.alpha, cfg.eps, cfg.truncation).unwrap();
        for id in 0..4 {
            let path = synth_path(&p.draw(9, id), &cfg, &t).unwrap();
            let i0 = cfg.origin_index();
            assert_eq!(cfg.time(i0), 0.0);
            assert_eq!(path.values[i0], 0.0);
            assert_eq!(path.components.low[i0], 0.0);
            let c = &path.components;
            for i in (0..cfg.n_points()).step_by(17) {
                assert_eq!(path.values[i], c.low[i] + c.high1[i] + c.high2[i]);
            }
            assert!(path.values.iter().any(|v| *v != 0.0));
        }
    }

    #[test]
    fn zero_and_negated_draws() {
        let cfg = small_cfg();
        let t = table(&cfg);
        let d = LePageParams::new(cfg.alpha, cfg.eps, cfg.truncation).unwrap().draw(1, 1);
        let mut zero = d.clone();
        zero.g_re.iter_mut().chain(zero.g_im.iter_mut()).for_each(|g| *g = 0.0);
        assert!(synth_path(&zero, &cfg, &t).unwrap().values.iter().all(|v| *v == 0.0));
        let a = synth_path(&d, &cfg, &t).unwrap();
        let b = synth_path(&d.negated(), &cfg, &t).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| *x == -*y));
    }

    #[test]
    fn inconsistent_inputs_are_rejected() {
        let cfg = small_cfg();
        let t = table(&cfg);
        let other = SynthConfig { hurst: 0.7, ..cfg.clone() };
        let d = LePageParams::new(cfg.alpha, cfg.eps, cfg.truncation).unwrap().draw(1, 1);
        assert!(matches!(synth_path(&d, &other, &t), Err(Error::Parameter(_))));
        assert!(matches!(ensemble(&cfg, 0, 1, &t, false, usize::MAX), Err(Error::Parameter(_))));
        assert!(matches!(ensemble(&cfg, 10, 1, &t, false, 100), Err(Error::Resource(_))));
    }

    #[test]
    fn ensembles_are_deterministic() {
        let cfg = small_cfg();
        let t = table(&cfg);
        let a = ensemble(&cfg, 3, 5, &t, true, usize::MAX).unwrap();
        let b = ensemble(&cfg, 3, 5, &t, true, usize::MAX).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.paths[0], a.paths[1]);
        let c = ensemble(&cfg, 3, 6, &t, false, usize::MAX).unwrap();
        assert_ne!(a.paths[0], c.paths[0]);
        assert!(c.components.is_none());
    }
}
