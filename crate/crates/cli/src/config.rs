//! Experiment configuration: a flat `key = value` text file.
//!
//! Values are resolved in three layers: built-in defaults, then the `--config`
//! file, then command-line flags (`--rho-tilde` sets `rho_tilde`). Reals accept
//! the form `2^-14` besides ordinary decimals; lists are comma separated.
//! The resolved file lists every key in a fixed order, and its SHA-256 is the
//! `config_hash` stamped on every report.

use std::fmt::Write as _;
use std::path::Path;

use hfsm_core::synth::SynthConfig;
use sha2::{Digest, Sha256};

use crate::CliError;

fn parse_real(s: &str) -> Option<f64> {
    if let Some((base, exp)) = s.split_once('^') {
        let b: f64 = base.trim().parse().ok()?;
        let e: f64 = exp.trim().parse().ok()?;
        return Some(b.powf(e));
    }
    s.parse().ok()
}

trait Value: Sized {
    fn parse_value(s: &str) -> Option<Self>;
    fn render(&self) -> String;
}

impl Value for f64 {
    fn parse_value(s: &str) -> Option<Self> {
        parse_real(s).filter(|v| !v.is_nan())
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

macro_rules! int_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn parse_value(s: &str) -> Option<Self> {
                s.parse().ok()
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
int_value!(i32, u32, u64, usize);

impl Value for Vec<f64> {
    fn parse_value(s: &str) -> Option<Self> {
        s.split(',').map(|p| f64::parse_value(p.trim())).collect()
    }
    fn render(&self) -> String {
        self.iter().map(|v| v.render()).collect::<Vec<_>>().join(",")
    }
}

macro_rules! experiment_config {
    ($($(#[doc = $doc:literal])* $key:ident: $ty:ty = $default:expr;)*) => {
        /// Every tunable of every command.
        #[derive(Debug, Clone, PartialEq)]
        pub struct ExperimentConfig {
            $($(#[doc = $doc])* pub $key: $ty,)*
        }

        impl Default for ExperimentConfig {
            fn default() -> Self {
                Self { $($key: $default,)* }
            }
        }

        impl ExperimentConfig {
            /// Keys in file order.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($key)),*];

            /// Help line of each key, in file order.
            pub const DOCS: &'static [&'static str] = &[$(concat!($($doc),*)),*];

            pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
                match key {
                    $(stringify!($key) => {
                        self.$key = <$ty as Value>::parse_value(value.trim()).ok_or_else(|| {
                            CliError::Parameter(format!("cannot parse {value:?} for key {key}"))
                        })?;
                    })*
                    _ => return Err(CliError::Parameter(format!("unknown configuration key {key:?}"))),
                }
                Ok(())
            }

            fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($key), self.$key.render())),*]
            }
        }
    };
}

experiment_config! {
    /// stability index α
    alpha: f64 = 1.5;
    /// Hurst index H
    hurst: f64 = 0.5;
    /// frequency density parameter ε
    eps: f64 = 0.5;
    /// time step of the path grid
    dt: f64 = 2f64.powi(-14);
    /// lowest synthesized level
    j_low: i32 = -8;
    /// highest synthesized level
    j_high: i32 = 12;
    /// kernel cutoff in units of 2^j t
    k_cut: f64 = 16.0;
    /// LePage truncation M
    truncation: usize = 10_000;
    /// half-width of the time domain
    rho_tilde: f64 = 0.5;
    /// half-width Y of the kernel table
    kernel_half_width: f64 = 64.0;
    /// node spacing of the kernel table
    kernel_step: f64 = 1.0 / 64.0;
    /// number of simulated paths
    n_paths: usize = 100;
    /// master seed
    seed: u64 = 1;
    /// number of paths exported as CSV
    csv_paths: usize = 1;
    /// highest level of the coefficient field
    j_max: i32 = 12;
    /// coefficient window |k| <= 2^j rho
    rho: f64 = 2.0;
    /// number of LePage draws for the growth regression
    n_draws: usize = 100;
    /// highest level of the binomial count check
    binomial_j_max: i32 = 20;
    /// coarsest modulus lag 2^-n_lo
    n_lo: u32 = 4;
    /// finest modulus lag 2^-n_hi
    n_hi: u32 = 12;
    /// times of the self-similarity fit
    t_list: Vec<f64> = (1..=8).rev().map(|n| 2f64.powi(-n)).collect();
    /// lowest level of the W_j scale regression
    wj_j_lo: u32 = 2;
    /// highest level of the W_j scale regression
    wj_j_hi: u32 = 8;
    /// fixed integration radius of the W_j scale regression
    wj_radius: f64 = 8.0;
    /// lowest level of the limsup diagnostic
    limsup_j_lo: u32 = 2;
    /// highest level of the limsup diagnostic
    limsup_j_hi: u32 = 10;
    /// level compared against limsup_j_hi
    limsup_from: u32 = 4;
    /// left end u of the W_j interval
    u: f64 = -1.0;
    /// right end v of the W_j interval
    v: f64 = 1.0;
}

impl ExperimentConfig {
    /// Applies a `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Parameter(format!("line {}: expected key = value, got {raw:?}", no + 1))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Parameter(format!("cannot read configuration {}: {e}", path.display()))
        })?;
        self.apply_text(&text)
    }

    /// Fully resolved file, one `key = value` line per key.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn synth(&self) -> SynthConfig {
        SynthConfig {
            alpha: self.alpha,
            hurst: self.hurst,
            eps: self.eps,
            dt: self.dt,
            j_low: self.j_low,
            j_high: self.j_high,
            k_cut: self.k_cut,
            truncation: self.truncation,
            rho_tilde: self.rho_tilde,
            kernel_half_width: self.kernel_half_width,
            kernel_step: self.kernel_step,
        }
    }
}

/// Flag spelling of a key.
pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}
