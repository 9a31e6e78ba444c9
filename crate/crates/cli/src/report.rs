//! JSON report records.
//!
//! Every law check becomes one record
//! `{law, target, estimate, stderr, interval, verdict, seed, n_paths, config_hash}`
//! with `verdict` either `"pass"` or `"fail"`. Non-finite numbers, including
//! unbounded interval ends, are written as `null`.

use std::path::Path;

use hfsm_core::analysis::Verdict;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Finite numbers pass through, anything else becomes `None` (`null`).
pub fn num(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn nums(xs: &[f64]) -> Vec<Option<f64>> {
    xs.iter().map(|&x| num(x)).collect()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LawReport {
    pub law: String,
    pub target: Option<f64>,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub interval: [Option<f64>; 2],
    pub verdict: &'static str,
    pub seed: u64,
    pub n_paths: usize,
    pub config_hash: String,
}

/// Provenance shared by the records of one run.
#[derive(Debug, Clone)]
pub struct Stamp {
    pub seed: u64,
    pub n_paths: usize,
    pub config_hash: String,
}

impl Stamp {
    pub fn law(&self, v: &Verdict) -> LawReport {
        LawReport {
            law: v.law.clone(),
            target: num(v.target),
            estimate: num(v.estimate),
            stderr: num(v.stderr),
            interval: [num(v.interval.0), num(v.interval.1)],
            verdict: if v.pass { "pass" } else { "fail" },
            seed: self.seed,
            n_paths: self.n_paths,
            config_hash: self.config_hash.clone(),
        }
    }

    pub fn laws<'a>(&self, vs: impl IntoIterator<Item = &'a Verdict>) -> Vec<LawReport> {
        vs.into_iter().map(|v| self.law(v)).collect()
    }
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.into()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
