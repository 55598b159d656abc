//! Point scatterer on the square torus `R^2 / 2πZ^2`.
//!
//! * [`arith`]: sums of two squares, `r2`, `omega1` and the sums `w_k`.
//! * [`spectral`]: the secular equation and its new eigenvalues.
//! * [`greens`]: Fourier data of the Green's function and matrix elements.
//! * [`ergostat`]: statistics of S and the full-density filter.
//! * [`cache`]: binary table cache.
//! * [`cli`]: the command-line front end.

pub mod arith;
pub mod cache;
pub mod cli;
pub mod dd;
pub mod ergostat;
pub mod error;
pub mod greens;
pub mod num;
pub mod spectral;

pub use error::{Error, Result};
