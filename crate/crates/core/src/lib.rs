//! Spherical wavelet frames on n-spheres.
//!
//! The crate builds zonal wavelet families (Poisson multipole wavelets of
//! integer and fractional order, Abel–Poisson, Gauss–Weierstrass and Mexican
//! needlets), the reproducing kernel of the Poisson wavelet transform,
//! cube-projection partitions of `S^n` and phase-space grids, and audits
//! discrete frames built on those grids: exact bounds on bandlimited
//! subspaces via a generalized eigenproblem, Monte-Carlo brackets, and
//! reconstruction with the frame algorithm.
//!
//! Heavy loops run on rayon when the `parallel` feature (default) is on;
//! see [`exec`] for the sequential fallback.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod families;
pub mod frames;
pub mod kernel;
pub mod special_fn;
pub mod sphere;

pub use error::{Error, Result};
pub use special_fn::Dimension;

/// Library version embedded in every structured output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
