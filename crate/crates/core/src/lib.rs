//! Numerical laboratory for harmonizable fractional stable motion (HFSM).
//!
//! The process is built from its Meyer-wavelet expansion
//!
//! `X(t) = Σ_{j,k} 2^{-jH} Re(ε_{j,k}) (Ψ(2^j t - k) - Ψ(-k))`
//!
//! where the complex stable coefficients `ε_{j,k}` are realized through a single
//! LePage series draw and `Ψ` is the fractional kernel obtained from the Meyer
//! spectrum. The crate is organized bottom-up:
//!
//! * [`meyer`]: frequency-domain Meyer wavelet and the test spectrum `θ̂`.
//! * [`kernel`]: tabulated fractional kernel `Ψ` and its derivative.
//! * [`lepage`]: the three random sequences of the LePage series and the analytic constants.
//! * [`coeffs`]: wavelet coefficients by direct and Abel-transformed summation.
//! * [`synth`]: sample paths and ensembles on a uniform time grid.
//! * [`analysis`]: scale, self-similarity, modulus-of-continuity and lower-bound statistics.
//! * [`io`]: the binary and CSV artifact formats.

pub mod analysis;
pub mod coeffs;
pub mod error;
pub mod io;
pub mod kernel;
pub mod lepage;
pub mod meyer;
pub mod quad;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
