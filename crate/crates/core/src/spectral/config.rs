use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use super::zeta::lattice_zeta;
use crate::arith::SumsOfTwoSquaresTable;
use crate::error::{Error, Result};

/// Window exponent used when none is given.
pub const DEFAULT_DELTA: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    Weak,
    Strong,
}

/// Coupling parameter and the cached right-hand side `c0 tan(phi/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CouplingConfig {
    pub mode: CouplingMode,
    pub phi: f64,
    pub delta: f64,
    pub c0: f64,
    pub rhs: f64,
}

impl CouplingConfig {
    pub fn weak(phi: f64) -> Result<Self> {
        check_phi(phi)?;
        let c0 = c0();
        Ok(CouplingConfig {
            mode: CouplingMode::Weak,
            phi,
            delta: 0.0,
            c0,
            rhs: c0 * (phi / 2.0).tan(),
        })
    }

    pub fn strong(phi: f64, delta: f64) -> Result<Self> {
        check_phi(phi)?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!(
                "window exponent {delta} must lie in (0, 1)"
            )));
        }
        let c0 = c0();
        Ok(CouplingConfig {
            mode: CouplingMode::Strong,
            phi,
            delta,
            c0,
            rhs: c0 * (phi / 2.0).tan(),
        })
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if !(phi.is_finite() && phi > -PI && phi < PI) {
        return Err(Error::Config(format!(
            "coupling phi = {phi} must lie strictly inside (-pi, pi)"
        )));
    }
    Ok(())
}

/// `c0` to full double precision, computed once.
pub fn c0() -> f64 {
    static C0: OnceLock<f64> = OnceLock::new();
    *C0.get_or_init(|| compute_c0(1e-14).expect("c0 at default tolerance"))
}

/// `c0 = sum_{n in S} r2(n) / (n^2 + 1)` with absolute error at most `tol`.
///
/// Uses `1/(n^2+1) = n^-2 - n^-4 + 1/(n^4 (n^2+1))`, so that the slowly
/// convergent part is `Z(2) - Z(4)` and the explicit sum decays like `n^-6`.
/// With `A(x) <= 2 pi x` for `x >= 100`, partial summation bounds the tail
/// of that sum beyond `N` by `12 pi / (5 N^5)`.
pub fn compute_c0(tol: f64) -> Result<f64> {
    if !(tol > 1e-15 && tol < 1.0) {
        return Err(Error::Config(format!(
            "c0 tolerance {tol} must lie in (1e-15, 1)"
        )));
    }
    let mut n_max = 128u64;
    while 12.0 * PI / (5.0 * (n_max as f64).powi(5)) > tol / 2.0 {
        n_max *= 2;
    }
    let table = SumsOfTwoSquaresTable::build(n_max)?;
    let mut sum = 0.0;
    for n in (1..=n_max).rev() {
        let r = table.r2_at(n);
        if r > 0 {
            let x = n as f64;
            let x2 = x * x;
            sum += r as f64 / (x2 * x2 * (x2 + 1.0));
        }
    }
    let head = (lattice_zeta(2) - lattice_zeta(4)).to_f64();
    Ok(1.0 + head + sum)
}
