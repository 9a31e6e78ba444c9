//! Statistical checks of the scaling, growth and regularity laws.
//!
//! Every estimator is a pure function of its input samples or paths. Verdicts
//! carry the estimate, its standard error and the interval that was tested.

pub mod ecf;
pub mod fixtures;
pub mod growth;
pub mod modulus;
pub mod selfsim;
pub mod stats;
pub mod wj;

use crate::error::{Error, Result};
use crate::synth::SynthConfig;

/// Uniform time grid `t_i = (i − origin)·dt`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dt: f64,
    pub origin: usize,
    pub len: usize,
}

impl Grid {
    pub fn new(dt: f64, origin: usize, len: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || origin >= len {
            return Err(Error::Parameter(format!(
                "invalid grid dt={dt}, origin={origin}, len={len}"
            )));
        }
        Ok(Self { dt, origin, len })
    }

    pub fn from_config(cfg: &SynthConfig) -> Self {
        Self { dt: cfg.dt, origin: cfg.origin_index(), len: cfg.n_points() }
    }

    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.origin as f64) * self.dt
    }

    /// Grid index of `t`, if `t` is a node up to rounding.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = self.origin as f64 + t / self.dt;
        let r = pos.round();
        ((pos - r).abs() <= 1e-9 * pos.abs().max(1.0) && r >= 0.0 && r < self.len as f64)
            .then_some(r as usize)
    }

    /// Linear interpolation of `path` at time `t`.
    pub fn interpolate(&self, path: &[f64], t: f64) -> Result<f64> {
        let pos = self.origin as f64 + t / self.dt;
        let last = (self.len - 1) as f64;
        if !(pos >= -1e-9 && pos <= last + 1e-9) {
            return Err(Error::Domain(format!(
                "time {t} outside the path grid [{}, {}]",
                self.time(0),
                self.time(self.len - 1)
            )));
        }
        let pos = pos.clamp(0.0, last);
        let i = (pos.floor() as usize).min(self.len.saturating_sub(2));
        let s = pos - i as f64;
        if s == 0.0 || self.len == 1 {
            return Ok(path[i]);
        }
        Ok(path[i] + s * (path[i + 1] - path[i]))
    }
}

/// Outcome of one statistical law check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub law: String,
    pub target: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub interval: (f64, f64),
    pub pass: bool,
}

impl Verdict {
    /// Passes when `estimate` lies in the closed `interval`.
    pub fn check(law: &str, target: f64, estimate: f64, stderr: f64, interval: (f64, f64)) -> Self {
        Self {
            law: law.to_string(),
            target,
            estimate,
            stderr,
            interval,
            pass: estimate.is_finite() && estimate >= interval.0 && estimate <= interval.1,
        }
    }
}
