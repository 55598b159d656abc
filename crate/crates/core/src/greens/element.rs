use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::observable::Observable;
use crate::arith::lattice_points;
use crate::error::{Error, Result};
use crate::num::{isqrt, unit_power};
use crate::spectral::{SecularEngine, SpectralPoint, FLUCTUATION_CONSTANT};

const MAX_DISK: u64 = 1 << 34;
const CHUNK: u64 = 1 << 12;

/// `<Op(e_{zeta,k}) g_lambda, g_lambda>` with its truncation data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixElement {
    pub zeta: (i64, i64),
    pub k: i64,
    pub lambda: f64,
    pub value: Complex64,
    /// Window half-width `B` (pure momentum) or disk radius `sqrt(X)` (mixed).
    pub truncation_radius: f64,
    /// Bound on the relative error from the neglected terms.
    pub tail_bound: f64,
}

/// Constant `C_W` in `|sum_{n<=x} w_k(n)| <= C_W sqrt(x)`, `4 | k`, `k != 0`.
/// Checked empirically up to `x = 10^6` and `|k| <= 64`.
pub fn wk_sum_constant(k: i64) -> f64 {
    10.0 + k.unsigned_abs() as f64 / 4.0
}

fn exact(zeta: (i64, i64), k: i64, lambda: f64, value: f64) -> MatrixElement {
    MatrixElement {
        zeta,
        k,
        lambda,
        value: Complex64::new(value, 0.0),
        truncation_radius: 0.0,
        tail_bound: 0.0,
    }
}

/// Partial summation bound on `sum_{|n - lambda| > B} w_k(n) / (n - lambda)^2`.
fn window_tail(lambda: f64, b: f64, cw: f64) -> f64 {
    let left = if lambda - b >= 1.0 {
        2.0 * (lambda - b).sqrt() / (b * b)
    } else {
        0.0
    };
    let right = 2.0 * (lambda + b).max(1.0).sqrt() / (b * b) + (4.0 / 3.0) * b.powf(-1.5);
    cw * (left + right)
}

/// Pure momentum element via `w_k`:
/// `(1/lambda^2 + sum w_k(n)/(n-lambda)^2) / (1/lambda^2 + sum r2(n)/(n-lambda)^2)`.
pub fn pure_momentum_element(
    engine: &SecularEngine<'_>,
    p: SpectralPoint,
    k: i64,
    tol: f64,
) -> Result<MatrixElement> {
    let lambda = p.value();
    if k == 0 {
        return Ok(exact((0, 0), 0, lambda, 1.0));
    }
    let d = engine.derivative(p, (tol * 1e-3).max(1e-13))?;
    let c0sq = 1.0 / (lambda * lambda);
    if k % 4 != 0 {
        return Ok(exact((0, 0), k, lambda, c0sq / d));
    }
    let table = engine.table();
    let cw = wk_sum_constant(k);
    let mut b = (lambda.abs().powf(0.6)).max(1e3);
    while window_tail(lambda, b, cw) > tol * d {
        b *= 2.0;
    }
    let hi = (lambda + b).floor();
    if hi > table.limit() as f64 {
        return Err(Error::WindowExceedsTable {
            needed: hi as u64,
            limit: table.limit(),
        });
    }
    let lo = (lambda - b).ceil().max(1.0) as u64;
    let hi = hi as u64;
    let partial: Vec<f64> = (lo / CHUNK..=hi / CHUNK)
        .into_par_iter()
        .map(|c| {
            let (a, z) = ((c * CHUNK).max(lo), ((c + 1) * CHUNK - 1).min(hi));
            let mut s = 0.0;
            for n in table.members(a, z) {
                let w = table.wk_quarter(n, k);
                if w != 0.0 {
                    let dist = p.distance_from(n);
                    s += 4.0 * w / (dist * dist);
                }
            }
            s
        })
        .collect();
    let num = c0sq + partial.iter().sum::<f64>();
    Ok(MatrixElement {
        zeta: (0, 0),
        k,
        lambda,
        value: Complex64::new(num / d, 0.0),
        truncation_radius: b,
        tail_bound: window_tail(lambda, b, cw) / d,
    })
}

fn check_lattice_pole(p: SpectralPoint) -> Result<()> {
    let lambda = p.value();
    let n = lambda.round();
    if n >= 0.0
        && p.distance_from(n as u64).abs() < 1e-12
        && !lattice_points(n as u64).points.is_empty()
    {
        return Err(Error::PoleProximity {
            lambda,
            pole: n as u64,
            distance: p.distance_from(n as u64).abs(),
        });
    }
    Ok(())
}

/// Sums over lattice points `eta` with `lo < |eta|^2 <= hi` (`lo = None`
/// includes the origin): `(sum u(eta)^k c(eta) c(eta + zeta), sum c(eta)^2)`.
fn annulus_sums(
    p: SpectralPoint,
    zeta: (i64, i64),
    k: i64,
    lo: Option<u64>,
    hi: u64,
    numerator: bool,
) -> (Complex64, f64) {
    let r = isqrt(hi) as i64;
    let rows: Vec<(Complex64, f64)> = (-r..=r)
        .into_par_iter()
        .map(|a| {
            let a2 = (a * a) as u64;
            let bmax = isqrt(hi - a2) as i64;
            let bmin = match lo {
                Some(l) if l >= a2 => isqrt(l - a2) as i64 + 1,
                _ => 0,
            };
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = 0.0;
            for b in bmin..=bmax {
                let signs: &[i64] = if b == 0 { &[0] } else { &[b, -b] };
                for &bb in signs {
                    let n = a2 + (bb * bb) as u64;
                    let c = 1.0 / p.distance_from(n);
                    den += c * c;
                    if numerator {
                        let (s1, s2) = (a + zeta.0, bb + zeta.1);
                        let cs = 1.0 / p.distance_from((s1 * s1 + s2 * s2) as u64);
                        num += unit_power(a, bb, k) * (c * cs);
                    }
                }
            }
            (num, den)
        })
        .collect();
    rows.into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(n, d), (rn, rd)| {
            (n + rn, d + rd)
        })
}

/// Mixed element from the raw lattice sum
/// `sum_eta (eta~/|eta~|)^k c(eta) c(eta + zeta) / sum_eta c(eta)^2`
/// over a disk grown until the tail bound drops below `tol`.
pub fn mixed_element(
    p: SpectralPoint,
    zeta: (i64, i64),
    k: i64,
    tol: f64,
) -> Result<MatrixElement> {
    let lambda = p.value();
    if zeta == (0, 0) && k == 0 {
        return Ok(exact(zeta, k, lambda, 1.0));
    }
    check_lattice_pole(p)?;
    let vanishing = zeta == (0, 0) && k % 4 != 0;
    let zn = ((zeta.0 * zeta.0 + zeta.1 * zeta.1) as f64).sqrt();
    let kf = k.unsigned_abs() as f64;
    let tail_bound = |x: f64| {
        2.0 * FLUCTUATION_CONSTANT * x.sqrt() / (x - lambda).powi(2)
            + PI / (x - lambda) * (kf + 2.0) * (zn + 1.0).powi(2) / x
    };
    let mut x = (9.0 * lambda).max(lambda + 1e3).ceil() as u64;
    let (mut num, mut den) = annulus_sums(p, zeta, k, None, x, !vanishing);
    while tail_bound(x as f64) > tol * den {
        let next = 2 * x;
        if next > MAX_DISK {
            return Err(Error::WindowExceedsTable {
                needed: next,
                limit: MAX_DISK,
            });
        }
        let (n2, d2) = annulus_sums(p, zeta, k, Some(x), next, !vanishing);
        num += n2;
        den += d2;
        x = next;
    }
    let smooth = PI / (x as f64 - lambda);
    if vanishing {
        num = Complex64::new(1.0 / (lambda * lambda), 0.0);
    } else if k == 0 {
        num += smooth;
    }
    let den = den + smooth;
    Ok(MatrixElement {
        zeta,
        k,
        lambda,
        value: num / den,
        truncation_radius: (x as f64).sqrt(),
        tail_bound: tail_bound(x as f64) / den,
    })
}

/// `<Op(a) g_lambda, g_lambda>` for a finite observable, term by term.
pub fn polynomial_element(
    obs: &Observable,
    engine: &SecularEngine<'_>,
    p: SpectralPoint,
    tol: f64,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (zeta, k, a) in obs.terms() {
        let el = if zeta == (0, 0) {
            pure_momentum_element(engine, p, k, tol)?
        } else {
            mixed_element(p, zeta, k, tol)?
        };
        acc += a * el.value;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::SumsOfTwoSquaresTable;
    use crate::spectral::{solve_interval, CouplingConfig};

    #[test]
    fn wk_partial_sums_within_constant() {
        let table = SumsOfTwoSquaresTable::build(1 << 20).unwrap();
        for k in [4i64, 8, 12, 16, 40, 64] {
            let cw = wk_sum_constant(k);
            let mut w = 0.0;
            for n in 1..=table.limit() {
                w += table.wk(n, k).unwrap().value;
                assert!(w.abs() <= cw * (n as f64).sqrt(), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn pure_and_mixed_agree_on_a_root() {
        let table = SumsOfTwoSquaresTable::build(1 << 20).unwrap();
        let eng = SecularEngine::new(&table).unwrap();
        let cfg = CouplingConfig::weak(0.0).unwrap();
        let rec = solve_interval(&eng, &cfg, Some(20), 25, 1e-10)
            .unwrap()
            .unwrap();
        let p = rec.point();
        for k in [4, 8] {
            let a = pure_momentum_element(&eng, p, k, 1e-7).unwrap();
            let b = mixed_element(p, (0, 0), k, 1e-7).unwrap();
            assert!(
                (a.value - b.value).norm() <= 1e-7 * a.value.norm().max(1e-3),
                "k={k}: {} vs {}",
                a.value,
                b.value
            );
            assert!(a.value.norm() <= 1.0 + 1e-9);
        }
        assert_eq!(
            pure_momentum_element(&eng, p, 0, 1e-9).unwrap().value.re,
            1.0
        );
        assert_eq!(mixed_element(p, (0, 0), 0, 1e-9).unwrap().value.re, 1.0);
        let d = eng.derivative(p, 1e-13).unwrap();
        let v = pure_momentum_element(&eng, p, 2, 1e-9).unwrap().value.re;
        assert_eq!(v, (1.0 / (p.value() * p.value())) / d);
    }

    #[test]
    fn conjugation_symmetry_for_even_k() {
        let p = SpectralPoint::below(25, 0.37);
        for (zeta, k) in [((1, 0), 0i64), ((1, 2), 4), ((2, -1), 2), ((0, 3), -6)] {
            let a = mixed_element(p, zeta, k, 1e-9).unwrap().value;
            let b = mixed_element(p, (-zeta.0, -zeta.1), -k, 1e-9)
                .unwrap()
                .value;
            assert!((a - b.conj()).norm() < 1e-10, "{zeta:?} {k}: {a} {b}");
            assert!(a.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn linearity() {
        let table = SumsOfTwoSquaresTable::build(1 << 18).unwrap();
        let eng = SecularEngine::new(&table).unwrap();
        let p = SpectralPoint::below(13, 0.41);
        let mut pa = Observable::exponential((0, 0), 4);
        pa.add_term((1, 0), 0, Complex64::new(0.3, -0.2));
        let qa = Observable::exponential((1, 1), 4);
        let (alpha, beta) = (Complex64::new(0.7, 0.1), Complex64::new(-1.2, 0.5));
        let combo = pa.scaled(alpha).plus(&qa.scaled(beta));
        let lhs = polynomial_element(&combo, &eng, p, 1e-7).unwrap();
        let rhs = alpha * polynomial_element(&pa, &eng, p, 1e-7).unwrap()
            + beta * polynomial_element(&qa, &eng, p, 1e-7).unwrap();
        assert!((lhs - rhs).norm() < 1e-10);
        let one = polynomial_element(&Observable::exponential((0, 0), 0), &eng, p, 1e-9).unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));
    }
}
