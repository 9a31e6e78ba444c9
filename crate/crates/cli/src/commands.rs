//! The subcommands. Each writes `config.txt` and its artifacts into the output
//! directory and returns a one-line summary.
//!
//! | command | artifacts |
//! |---|---|
//! | simulate | `ensemble.bin`, `path_<i>.csv`, `simulate.json` |
//! | coeffs | `coeffs.csv` (draw 0), `growth.csv`, `growth.json` |
//! | modulus | `modulus.json`, `modulus_lags.csv`, `selfsim.json` (at least 100 paths) |
//! | lowerbound | `wj.json`, `wj_scales.csv` |
//! | validate | `validate.json` |
//! | kernel-table | `kernel_table.csv`, `kernel.json` |

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hfsm_core::analysis::growth::{binomial_constant, growth_regression, level_maxima};
use hfsm_core::analysis::modulus::modulus_profile;
use hfsm_core::analysis::selfsim::{self_similarity_check, MIN_PATHS};
use hfsm_core::analysis::wj::{limsup_diagnostic, wj_matrix, wj_scale_regression, Window};
use hfsm_core::analysis::Grid;
use hfsm_core::coeffs::{binomial_counts, coeff_field, DEFAULT_FIELD_CAP};
use hfsm_core::io::{read_ensemble, write_ensemble, write_path_csv};
use hfsm_core::kernel::{load_or_build, KernelTable};
use hfsm_core::lepage::LePageParams;
use hfsm_core::synth::{ensemble, synth_path, PathEnsemble, SynthConfig, DEFAULT_ENSEMBLE_CAP};
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::report::{num, nums, write_json, Stamp};
use crate::validate::run_suite;
use crate::{Cmd, CliError};

/// Resolved inputs of one invocation.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub cache_dir: PathBuf,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn prepare(&self) -> Result<String, CliError> {
        fs::create_dir_all(&self.out)?;
        fs::write(self.path("config.txt"), self.cfg.render())?;
        Ok(self.cfg.hash())
    }

    fn table(&self, synth: &SynthConfig) -> Result<KernelTable, CliError> {
        Ok(load_or_build(
            Some(&self.cache_dir),
            synth.alpha,
            synth.hurst,
            synth.kernel_half_width,
            synth.kernel_step,
            synth.rho_tilde,
        )?)
    }

    fn load_ensemble(&self, path: &Option<PathBuf>) -> Result<PathEnsemble, CliError> {
        let path = path.clone().unwrap_or_else(|| self.path("ensemble.bin"));
        let file = File::open(&path).map_err(|e| {
            CliError::MissingInput(format!("cannot open ensemble {}: {e}; run `simulate` first", path.display()))
        })?;
        Ok(read_ensemble(BufReader::new(file))?)
    }
}

pub fn dispatch(ctx: &Context, cmd: &Cmd) -> Result<String, CliError> {
    match cmd {
        Cmd::Simulate => simulate(ctx),
        Cmd::Coeffs => coeffs(ctx),
        Cmd::Modulus { ensemble } => modulus(ctx, ensemble),
        Cmd::Lowerbound { ensemble } => lowerbound(ctx, ensemble),
        Cmd::Validate { perturb } => validate(ctx, perturb.as_deref()),
        Cmd::KernelTable => kernel_table(ctx),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub fn simulate(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    let synth = cfg.synth();
    synth.validate()?;
    if cfg.csv_paths > cfg.n_paths {
        return Err(CliError::Parameter(format!(
            "csv_paths = {} exceeds n_paths = {}",
            cfg.csv_paths, cfg.n_paths
        )));
    }
    let hash = ctx.prepare()?;
    let table = ctx.table(&synth)?;
    let ens = ensemble(&synth, cfg.n_paths, cfg.seed, &table, false, DEFAULT_ENSEMBLE_CAP)?;
    let mut w = BufWriter::new(File::create(ctx.path("ensemble.bin"))?);
    write_ensemble(&ens, &mut w)?;
    w.flush()?;

    let params = LePageParams::new(synth.alpha, synth.eps, synth.truncation)?;
    for i in 0..cfg.csv_paths {
        let p = synth_path(&params.draw(cfg.seed, ens.seeds[i]), &synth, &table)?;
        let one = PathEnsemble {
            config: synth.clone(),
            master_seed: cfg.seed,
            paths: vec![p.values],
            seeds: vec![ens.seeds[i]],
            components: Some(vec![p.components]),
        };
        let mut w = BufWriter::new(File::create(ctx.path(&format!("path_{i}.csv")))?);
        write_path_csv(&one, 0, &mut w)?;
        w.flush()?;
    }

    let sup = ens.paths.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let summary = json!({
        "command": "simulate",
        "seed": cfg.seed,
        "n_paths": ens.n_paths(),
        "n_points": ens.n_points(),
        "config_hash": hash,
        "dt": synth.dt,
        "rho_tilde": synth.rho_tilde,
        "kernel_decay_constant": num(table.decay_constant),
        "kernel_far_field_bias": num(table.far_field_bias()),
        "max_abs_value": num(sup),
    });
    write_json(&ctx.path("simulate.json"), &summary)?;
    Ok(format!(
        "simulate: {} paths of {} points in {}",
        ens.n_paths(),
        ens.n_points(),
        ctx.out.display()
    ))
}

pub fn coeffs(ctx: &Context) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    if cfg.n_draws == 0 {
        return Err(CliError::Parameter("n_draws must be at least 1".into()));
    }
    if cfg.j_max < 0 || !(cfg.rho > 0.0) {
        return Err(CliError::Parameter(format!(
            "empty coefficient window: j_max = {}, rho = {}",
            cfg.j_max, cfg.rho
        )));
    }
    if cfg.binomial_j_max < 0 {
        return Err(CliError::Parameter("binomial_j_max must be nonnegative".into()));
    }
    let params = LePageParams::new(cfg.alpha, cfg.eps, cfg.truncation + 1)?;
    let hash = ctx.prepare()?;
    let m = cfg.truncation;
    let levels: Vec<i32> = (0..=cfg.j_max).collect();
    let bin_levels: Vec<i32> = (0..=cfg.binomial_j_max).collect();
    let mut maxima = Vec::with_capacity(cfg.n_draws);
    let mut counts = Vec::with_capacity(cfg.n_draws);
    for id in 0..cfg.n_draws as u64 {
        let draw = params.draw(cfg.seed, id);
        let field = coeff_field(&draw, cfg.j_max, cfg.rho, m, DEFAULT_FIELD_CAP)?;
        if id == 0 {
            let mut w = BufWriter::new(File::create(ctx.path("coeffs.csv"))?);
            field.write_csv(&mut w)?;
            w.flush()?;
        }
        maxima.push(level_maxima(&field));
        let per_level: Vec<Vec<u32>> = bin_levels
            .par_iter()
            .map(|&j| binomial_counts(j, &draw, m))
            .collect::<Result<_, _>>()?;
        counts.push(per_level);
    }
    let growth = growth_regression(&maxima, &levels, cfg.alpha)?;
    let binom = binomial_constant(&counts, &bin_levels, cfg.eps)?;

    let mut csv = String::from("j,mean_log_max\n");
    for (j, v) in levels.iter().zip(&growth.mean_log_max) {
        let _ = writeln!(csv, "{j},{v}");
    }
    write_text(&ctx.path("growth.csv"), &csv)?;

    let stamp = Stamp { seed: cfg.seed, n_paths: cfg.n_draws, config_hash: hash };
    let mut reports = stamp.laws(&growth.verdicts);
    reports.push(stamp.law(&binom.verdict));
    let jf = &growth.joint_fit;
    let doc = json!({
        "command": "coeffs",
        "reports": reports,
        "details": {
            "levels": levels,
            "mean_log_max": nums(&growth.mean_log_max),
            "log_fit": { "slope": num(growth.log_fit.slope), "stderr": num(growth.log_fit.slope_stderr), "dof": growth.log_fit.dof },
            "exp_fit": { "slope": num(growth.exp_fit.slope), "stderr": num(growth.exp_fit.slope_stderr), "dof": growth.exp_fit.dof },
            "joint_fit": {
                "log_coef": num(jf.coef[0]),
                "log_stderr": num(jf.coef_stderr[0]),
                "exp_coef": num(jf.coef[1]),
                "exp_stderr": num(jf.coef_stderr[1]),
                "dof": jf.dof,
            },
            "binomial_argmax": { "draw": binom.argmax.0, "j": binom.argmax.1, "m": binom.argmax.2 },
            "truncation": m,
            "eps": cfg.eps,
            "growth_exponent_bound": (1.0 + cfg.eps) / cfg.alpha,
        },
    });
    write_json(&ctx.path("growth.json"), &doc)?;
    Ok(format!(
        "coeffs: log-growth slope {:.3}, 2^j slope {:.4}, binomial constant {:.3}",
        growth.log_fit.slope, growth.exp_fit.slope, binom.constant
    ))
}

pub fn modulus(ctx: &Context, path: &Option<PathBuf>) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    if cfg.n_lo > cfg.n_hi {
        return Err(CliError::Parameter(format!("n_lo = {} exceeds n_hi = {}", cfg.n_lo, cfg.n_hi)));
    }
    let ens = ctx.load_ensemble(path)?;
    let hash = ctx.prepare()?;
    let sc = &ens.config;
    let r = modulus_profile(&ens.paths, sc.dt, sc.hurst, sc.alpha, cfg.n_lo..=cfg.n_hi)?;
    let stamp = Stamp { seed: ens.master_seed, n_paths: ens.n_paths(), config_hash: hash };

    let mut csv = String::from("n,lag,sup_increment,median_sup_increment\n");
    for i in 0..r.levels.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.levels[i], r.lags[i], r.sup_increments[i], r.median_sup_increments[i]
        );
    }
    write_text(&ctx.path("modulus_lags.csv"), &csv)?;

    let fit = |f: &hfsm_core::analysis::stats::LineFit| {
        json!({ "slope": num(f.slope), "stderr": num(f.slope_stderr), "intercept": num(f.intercept), "dof": f.dof })
    };
    let doc = json!({
        "command": "modulus",
        "reports": stamp.laws(&r.verdicts),
        "details": {
            "alpha": sc.alpha,
            "hurst": sc.hurst,
            "eps": sc.eps,
            "levels": r.levels,
            "lags": nums(&r.lags),
            "sup_increments": nums(&r.sup_increments),
            "median_sup_increments": nums(&r.median_sup_increments),
            "gamma_hat": num(r.gamma_hat()),
            "gamma_fit": fit(&r.gamma_fit),
            "median_gamma_fit": fit(&r.median_gamma_fit),
            "hurst_hat": num(r.hurst_hat()),
            "hurst_fit": fit(&r.hurst_fit),
            "alpha_hat": r.alpha_hat.and_then(num),
            "inverse_alpha": 1.0 / sc.alpha,
            "older_exponent": 1.0 / sc.alpha + 0.5,
        },
    });
    write_json(&ctx.path("modulus.json"), &doc)?;

    let mut line = format!("modulus: gamma_hat {:.3} over {} paths", r.gamma_hat(), ens.n_paths());
    if ens.n_paths() >= MIN_PATHS {
        let grid = Grid::from_config(sc);
        let s = self_similarity_check(&ens.paths, &grid, &cfg.t_list, sc.hurst)?;
        let doc = json!({
            "command": "selfsim",
            "reports": stamp.laws(&s.verdicts),
            "details": {
                "times": nums(&s.times),
                "scales": nums(&s.scales),
                "alphas": nums(&s.alphas),
                "slope": num(s.fit.slope),
                "slope_stderr": num(s.fit.slope_stderr),
                "ratios": s.ratios.iter().map(|(t, q)| json!([num(*t), num(*q)])).collect::<Vec<_>>(),
                "stationarity_lag": num(s.stationarity_lag),
                "stationarity_starts": [num(s.stationarity_starts.0), num(s.stationarity_starts.1)],
                "stationarity_distance": num(s.stationarity_distance),
                "stationarity_threshold": num(s.stationarity_threshold),
            },
        });
        write_json(&ctx.path("selfsim.json"), &doc)?;
        let _ = write!(line, ", self-similarity slope {:.3}", s.fit.slope);
    }
    Ok(line)
}

pub fn lowerbound(ctx: &Context, path: &Option<PathBuf>) -> Result<String, CliError> {
    let cfg = &ctx.cfg;
    if cfg.wj_j_lo >= cfg.wj_j_hi || cfg.limsup_j_lo >= cfg.limsup_j_hi {
        return Err(CliError::Parameter("level ranges must contain at least two levels".into()));
    }
    if !(cfg.wj_radius > 0.0 && cfg.wj_radius.is_finite()) {
        return Err(CliError::Parameter(format!("wj_radius must be positive, got {}", cfg.wj_radius)));
    }
    let ens = ctx.load_ensemble(path)?;
    let hash = ctx.prepare()?;
    let sc = &ens.config;
    let grid = Grid::from_config(sc);
    let wj_levels: Vec<u32> = (cfg.wj_j_lo..=cfg.wj_j_hi).collect();
    let values = wj_matrix(&ens.paths, &grid, &wj_levels, Window::Fixed(cfg.wj_radius), cfg.u, cfg.v)?;
    let scale = wj_scale_regression(&values, &wj_levels, sc.hurst)?;
    let ls_levels: Vec<u32> = (cfg.limsup_j_lo..=cfg.limsup_j_hi).collect();
    let tilde = wj_matrix(&ens.paths, &grid, &ls_levels, Window::Dyadic, cfg.u, cfg.v)?;
    let limsup = limsup_diagnostic(&tilde, &ls_levels, sc.hurst, sc.alpha, (cfg.limsup_from, cfg.limsup_j_hi))?;

    let mut csv = String::from("j,scale,alpha_hat\n");
    for i in 0..wj_levels.len() {
        let _ = writeln!(csv, "{},{},{}", wj_levels[i], scale.scales[i], scale.alphas[i]);
    }
    write_text(&ctx.path("wj_scales.csv"), &csv)?;

    let stamp = Stamp { seed: ens.master_seed, n_paths: ens.n_paths(), config_hash: hash };
    let doc = json!({
        "command": "lowerbound",
        "reports": stamp.laws([&scale.verdict, &limsup.verdict]),
        "details": {
            "alpha": sc.alpha,
            "hurst": sc.hurst,
            "u": cfg.u,
            "v": cfg.v,
            "wj_radius": cfg.wj_radius,
            "wj_levels": wj_levels,
            "wj_scales": nums(&scale.scales),
            "wj_alphas": nums(&scale.alphas),
            "wj_slope": num(scale.fit.slope),
            "wj_slope_stderr": num(scale.fit.slope_stderr),
            "wj_intercept": num(scale.fit.intercept),
            "wj_hurst_hat": num(-scale.fit.slope / std::f64::consts::LN_2),
            "limsup_levels": ls_levels,
            "limsup_median_running_max": nums(&limsup.pooled),
            "limsup_compared": [limsup.compared.0, limsup.compared.1],
            "limsup_fraction_increased": num(limsup.fraction_increased),
        },
    });
    write_json(&ctx.path("wj.json"), &doc)?;
    Ok(format!(
        "lowerbound: W_j scale slope {:.4} (target {:.4}), limsup fraction increased {:.3}",
        scale.fit.slope,
        -sc.hurst * std::f64::consts::LN_2,
        limsup.fraction_increased
    ))
}

pub fn validate(ctx: &Context, perturb: Option<&str>) -> Result<String, CliError> {
    let perturb = match perturb {
        None => None,
        Some(s) => {
            let (name, f) = s
                .split_once('=')
                .ok_or_else(|| CliError::Parameter(format!("--perturb expects CHECK=FACTOR, got {s:?}")))?;
            let f: f64 = f
                .trim()
                .parse()
                .map_err(|_| CliError::Parameter(format!("bad perturbation factor {f:?}")))?;
            Some((name.trim().to_string(), f))
        }
    };
    let checks = run_suite(ctx.cfg.seed, perturb.as_ref().map(|(n, f)| (n.as_str(), *f)))?;
    let hash = ctx.prepare()?;
    let reports: Vec<_> = checks
        .iter()
        .map(|c| Stamp { seed: ctx.cfg.seed, n_paths: c.samples, config_hash: hash.clone() }.law(&c.verdict))
        .collect();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.verdict.pass).map(|c| c.verdict.law.as_str()).collect();
    let doc = json!({
        "command": "validate",
        "verdict": if failed.is_empty() { "pass" } else { "fail" },
        "failed": failed,
        "reports": reports,
    });
    write_json(&ctx.path("validate.json"), &doc)?;
    if failed.is_empty() {
        Ok(format!("validate: all {} checks pass", checks.len()))
    } else {
        Err(CliError::ValidationFailed(format!("failed checks: {}", failed.join(", "))))
    }
}

pub fn kernel_table(ctx: &Context) -> Result<String, CliError> {
    let synth = ctx.cfg.synth();
    let hash = ctx.prepare()?;
    let t = ctx.table(&synth)?;
    let mut csv = String::with_capacity(t.len() * 64);
    csv.push_str("y,psi,psi_prime\n");
    for i in 0..t.len() {
        let _ = writeln!(csv, "{},{},{}", t.node(i), t.psi_values[i], t.psi_prime_values[i]);
    }
    write_text(&ctx.path("kernel_table.csv"), &csv)?;
    let doc = json!({
        "command": "kernel-table",
        "config_hash": hash,
        "alpha": t.alpha,
        "hurst": t.hurst,
        "grid_half_width": t.grid_half_width,
        "grid_step": t.grid_step,
        "nodes": t.len(),
        "rho_tilde": t.rho_tilde,
        "decay_constant": num(t.decay_constant),
        "far_field_bias": num(t.far_field_bias()),
        "sup_psi_prime": num(t.sup_psi_prime()),
    });
    write_json(&ctx.path("kernel.json"), &doc)?;
    Ok(format!("kernel-table: {} nodes in {}", t.len(), ctx.out.display()))
}
