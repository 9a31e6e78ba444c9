//! Artifact formats for path ensembles.
//!
//! Binary ensemble file, all little-endian:
//!
//! | field | type |
//! |---|---|
//! | magic `HFSMENS\0` | 8 bytes |
//! | version (= 1) | `u32` |
//! | α, H, ε, Δt, k_cut, ρ̃, kernel half-width, kernel step | 8 × `f64` |
//! | j_low, j_high | 2 × `i32` |
//! | truncation M, master seed, path count P, point count N | 4 × `u64` |
//! | component flag (0 or 1) | `u32` |
//! | draw ids | P × `u64` |
//! | path values, path after path | P·N × `f64` |
//! | if flagged: `x_low`, `x_high1`, `x_high2` of each path in turn | 3·P·N × `f64` |
//!
//! Path CSV: header `t,x,x_low,x_high1,x_high2`, one row per grid point,
//! numbers in shortest round-trip decimal form.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::synth::{Components, PathEnsemble, SynthConfig};

const ENSEMBLE_MAGIC: &[u8; 8] = b"HFSMENS\0";
const ENSEMBLE_VERSION: u32 = 1;

fn put_f64s(w: &mut impl Write, v: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(v.len() * 8);
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn get_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

/// Writes an ensemble in the binary layout above.
pub fn write_ensemble(ens: &PathEnsemble, mut w: impl Write) -> Result<()> {
    let c = &ens.config;
    w.write_all(ENSEMBLE_MAGIC)?;
    w.write_all(&ENSEMBLE_VERSION.to_le_bytes())?;
    put_f64s(
        &mut w,
        &[c.alpha, c.hurst, c.eps, c.dt, c.k_cut, c.rho_tilde, c.kernel_half_width, c.kernel_step],
    )?;
    w.write_all(&c.j_low.to_le_bytes())?;
    w.write_all(&c.j_high.to_le_bytes())?;
    for v in [c.truncation as u64, ens.master_seed, ens.n_paths() as u64, c.n_points() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&(ens.components.is_some() as u32).to_le_bytes())?;
    for s in &ens.seeds {
        w.write_all(&s.to_le_bytes())?;
    }
    for p in &ens.paths {
        put_f64s(&mut w, p)?;
    }
    if let Some(comps) = &ens.components {
        for cp in comps {
            put_f64s(&mut w, &cp.low)?;
            put_f64s(&mut w, &cp.high1)?;
            put_f64s(&mut w, &cp.high2)?;
        }
    }
    Ok(())
}

/// Reads an ensemble written by [`write_ensemble`].
pub fn read_ensemble(mut r: impl Read) -> Result<PathEnsemble> {
    if &get::<8>(&mut r)? != ENSEMBLE_MAGIC {
        return Err(Error::Format("not an ensemble file".into()));
    }
    let version = u32::from_le_bytes(get(&mut r)?);
    if version != ENSEMBLE_VERSION {
        return Err(Error::Format(format!("unsupported ensemble version {version}")));
    }
    let f = get_f64s(&mut r, 8)?;
    let j_low = i32::from_le_bytes(get(&mut r)?);
    let j_high = i32::from_le_bytes(get(&mut r)?);
    let mut u = [0u64; 4];
    for x in u.iter_mut() {
        *x = u64::from_le_bytes(get(&mut r)?);
    }
    let flag = u32::from_le_bytes(get(&mut r)?);
    let config = SynthConfig {
        alpha: f[0],
        hurst: f[1],
        eps: f[2],
        dt: f[3],
        k_cut: f[4],
        rho_tilde: f[5],
        kernel_half_width: f[6],
        kernel_step: f[7],
        j_low,
        j_high,
        truncation: u[0] as usize,
    };
    config
        .validate()
        .map_err(|e| Error::Format(format!("ensemble header holds an invalid configuration: {e}")))?;
    let (n_paths, n_points) = (u[2] as usize, u[3] as usize);
    if n_points != config.n_points() || flag > 1 {
        return Err(Error::Format("ensemble header is inconsistent".into()));
    }
    let mut seeds = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        seeds.push(u64::from_le_bytes(get(&mut r)?));
    }
    let mut paths = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        paths.push(get_f64s(&mut r, n_points)?);
    }
    let components = if flag == 1 {
        let mut v = Vec::with_capacity(n_paths);
        for _ in 0..n_paths {
            v.push(Components {
                low: get_f64s(&mut r, n_points)?,
                high1: get_f64s(&mut r, n_points)?,
                high2: get_f64s(&mut r, n_points)?,
            });
        }
        Some(v)
    } else {
        None
    };
    Ok(PathEnsemble { config, master_seed: u[1], paths, seeds, components })
}

/// Writes path `index` of the ensemble as CSV; component columns are empty when
/// the ensemble does not carry them.
pub fn write_path_csv(ens: &PathEnsemble, index: usize, mut w: impl Write) -> Result<()> {
    let path = ens
        .paths
        .get(index)
        .ok_or_else(|| Error::Parameter(format!("path {index} not in an ensemble of {}", ens.n_paths())))?;
    let comps = ens.components.as_ref().map(|c| &c[index]);
    let mut out = String::with_capacity(path.len() * 64);
    out.push_str("t,x,x_low,x_high1,x_high2\n");
    for (i, x) in path.iter().enumerate() {
        let t = ens.config.time(i);
        match comps {
            Some(c) => out.push_str(&format!("{t},{x},{},{},{}\n", c.low[i], c.high1[i], c.high2[i])),
            None => out.push_str(&format!("{t},{x},,,\n")),
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}
