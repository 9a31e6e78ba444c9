use hfsm_core::analysis::ecf::ecf_scale_alpha;
use hfsm_core::kernel::{build_table, KernelTable};
use hfsm_core::lepage::LePageParams;
use hfsm_core::synth::{ensemble, synth_path, SynthConfig};
use proptest::prelude::*;

fn table(cfg: &SynthConfig) -> KernelTable {
    build_table(cfg.alpha, cfg.hurst, cfg.kernel_half_width, cfg.kernel_step, cfg.rho_tilde).unwrap()
}

fn small(dt_exp: i32) -> SynthConfig {
    SynthConfig {
        dt: 2f64.powi(-dt_exp),
        j_low: -4,
        j_high: 6,
        truncation: 2000,
        kernel_half_width: 32.0,
        ..SynthConfig::default()
    }
}

fn sup(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn doubling_kernel_cutoff_barely_moves_default_paths() {
    // Ψ decays like |y|^-5, so a single large coefficient just past the cutoff can
    // push one draw over 1e-4; the bound is checked on the bulk of the draws
    let base = SynthConfig::default();
    let wide = SynthConfig { k_cut: 32.0, ..base.clone() };
    let t = table(&base);
    let p = LePageParams::new(base.alpha, base.eps, base.truncation).unwrap();
    let n = 40;
    let mut below = 0;
    for id in 0..n {
        let d = p.draw(51, id);
        let a = synth_path(&d, &base, &t).unwrap().values;
        let b = synth_path(&d, &wide, &t).unwrap().values;
        let r = sup(a.iter().zip(&b).map(|(x, y)| x - y)) / sup(b.iter().copied());
        assert!(r < 3e-4, "draw {id}: {r}");
        below += (r < 1e-4) as usize;
    }
    assert!(below * 10 >= n as usize * 9, "{below} of {n} draws below 1e-4");
}

fn max_second_difference(x: &[f64], dt: f64) -> f64 {
    sup(x.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dt * dt)))
}

fn max_slope(x: &[f64], dt: f64) -> f64 {
    sup(x.windows(2).map(|w| (w[1] - w[0]) / dt))
}

#[test]
fn low_part_is_smooth_under_refinement() {
    let (coarse, fine) = (small(8), small(10));
    let t = table(&coarse);
    let p = LePageParams::new(coarse.alpha, coarse.eps, coarse.truncation).unwrap();
    for id in 0..4 {
        let d = p.draw(52, id);
        let a = synth_path(&d, &coarse, &t).unwrap().components.low;
        let b = synth_path(&d, &fine, &t).unwrap().components.low;
        let (ca, cb) = (max_second_difference(&a, coarse.dt), max_second_difference(&b, fine.dt));
        assert!(ca.is_finite() && cb.is_finite());
        if ca > 0.0 {
            assert!(cb / ca < 1.5 && ca / cb < 1.5, "draw {id}: {ca} vs {cb}");
        }
    }
}

#[test]
fn far_high_part_is_lipschitz_across_the_ensemble() {
    let (coarse, fine) = (small(8), small(10));
    let t = table(&coarse);
    let a = ensemble(&coarse, 24, 53, &t, true, usize::MAX).unwrap();
    let b = ensemble(&fine, 24, 53, &t, true, usize::MAX).unwrap();
    let lip = |e: &hfsm_core::synth::PathEnsemble, dt: f64| {
        sup(e.components.as_ref().unwrap().iter().map(|c| max_slope(&c.high2, dt)))
    };
    let (la, lb) = (lip(&a, coarse.dt), lip(&b, fine.dt));
    assert!(la.is_finite() && lb.is_finite());
    assert!(lb <= 1.5 * la.max(f64::MIN_POSITIVE), "{la} vs {lb}");
}

#[test]
fn ensemble_mean_vanishes_within_stable_error() {
    let cfg = small(7);
    let t = table(&cfg);
    let n = 300;
    let e = ensemble(&cfg, n, 54, &t, false, usize::MAX).unwrap();
    let i0 = cfg.origin_index();
    for i in [0, i0 / 2, i0 + 10, cfg.n_points() - 1] {
        let col = e.column(i);
        let mean = col.iter().sum::<f64>() / n as f64;
        let fit = ecf_scale_alpha(&col).unwrap();
        // the mean of n iid SαS(σ) variables is SαS(σ n^{1/α − 1})
        let spread = fit.scale * (n as f64).powf(1.0 / cfg.alpha - 1.0);
        assert!(mean.abs() < 20.0 * spread, "t={}: {mean} vs {spread}", cfg.time(i));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn origin_is_exactly_zero_and_sign_flip_negates(seed in any::<u64>(), id in 0u64..100) {
        let cfg = SynthConfig { dt: 1.0 / 64.0, j_low: -2, j_high: 4, truncation: 500, kernel_half_width: 32.0, ..SynthConfig::default() };
        let t = table(&cfg);
        let d = LePageParams::new(cfg.alpha, cfg.eps, cfg.truncation).unwrap().draw(seed, id);
        let a = synth_path(&d, &cfg, &t).unwrap();
        let b = synth_path(&d.negated(), &cfg, &t).unwrap();
        prop_assert_eq!(a.values[cfg.origin_index()], 0.0);
        prop_assert!(a.values.iter().all(|v| v.is_finite()));
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| *x == -*y));
    }
}
