use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::num::isqrt;
use crate::spectral::{SecularEngine, SpectralPoint};

/// Fourier data `c(xi) = 1 / (|xi|^2 - lambda)` of `G_lambda(., x0)` and its
/// squared `L^2` norm up to the factor `(4 pi^2)^-2 (2 pi)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreensCoefficients {
    pub lambda: SpectralPoint,
    pub x0: (f64, f64),
    /// `D(lambda) = sum_xi c(xi)^2`.
    pub norm_denominator: f64,
    pub truncation: u64,
}

impl GreensCoefficients {
    pub fn new(
        engine: &SecularEngine<'_>,
        lambda: SpectralPoint,
        x0: (f64, f64),
        tol: f64,
    ) -> Result<Self> {
        let norm_denominator = engine.derivative(lambda, tol)?;
        let lam = lambda.value();
        let truncation = (4.0 * lam.abs()).max(lam.abs() + 1e4) as u64;
        Ok(GreensCoefficients {
            lambda,
            x0,
            norm_denominator,
            truncation,
        })
    }

    pub fn coefficient(&self, xi: (i64, i64)) -> f64 {
        1.0 / self
            .lambda
            .distance_from((xi.0 * xi.0 + xi.1 * xi.1) as u64)
    }
}

/// A position-space value of the spherically truncated Green's function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreensValue {
    pub value: f64,
    pub imaginary: f64,
    pub radius: f64,
}

/// `(1 / 4 pi^2) sum_{|xi| <= R} c(xi) e^{i <x - x0, xi>}`.
///
/// The sum converges only conditionally as `R` grows; `R` is part of the
/// result.
pub fn eval_greens(
    lambda: SpectralPoint,
    x: (f64, f64),
    x0: (f64, f64),
    radius: f64,
) -> Result<GreensValue> {
    let two_pi = 2.0 * PI;
    let wrap = |d: f64| d - two_pi * (d / two_pi).round();
    let (d1, d2) = (wrap(x.0 - x0.0), wrap(x.1 - x0.1));
    if d1 == 0.0 && d2 == 0.0 {
        return Err(Error::Domain(
            "the Green's function is singular at x = x0".into(),
        ));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::Config(format!(
            "radius {radius} must be finite and non-negative"
        )));
    }
    let r2max = (radius * radius).floor() as u64;
    let r = isqrt(r2max) as i64;
    let (mut re, mut im) = (0.0, 0.0);
    for a in -r..=r {
        let bmax = isqrt(r2max - (a * a) as u64) as i64;
        for b in -bmax..=bmax {
            let n = (a * a + b * b) as u64;
            let dist = lambda.distance_from(n);
            if dist.abs() < 1e-12 {
                return Err(Error::PoleProximity {
                    lambda: lambda.value(),
                    pole: n,
                    distance: dist.abs(),
                });
            }
            let c = 1.0 / dist;
            let phase = d1 * a as f64 + d2 * b as f64;
            re += c * phase.cos();
            im += c * phase.sin();
        }
    }
    let scale = 1.0 / (4.0 * PI * PI);
    Ok(GreensValue {
        value: re * scale,
        imaginary: im * scale,
        radius,
    })
}
