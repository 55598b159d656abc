use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{CouplingConfig, CouplingMode};
use super::zeta::lattice_zeta;
use crate::arith::SumsOfTwoSquaresTable;
use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

const LEAF_LEVEL: u32 = 6;
const ORDER: usize = 20;
const SEPARATION: f64 = 3.0;
const POLE_GUARD: f64 = 1e-12;

/// Constant `C` in `|sum_{n<=x} r2(n) - pi x| <= C sqrt(x)`.
pub const FLUCTUATION_CONSTANT: f64 = 10.0;

/// A spectral parameter `anchor + offset`, kept split so that `n - lambda`
/// stays accurate when `lambda` sits close to an integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub anchor: i64,
    pub offset: f64,
}

impl SpectralPoint {
    pub fn new(lambda: f64) -> Self {
        let anchor = lambda.round();
        SpectralPoint {
            anchor: anchor as i64,
            offset: lambda - anchor,
        }
    }

    /// `m - t`, the point at distance `t` below `m`.
    pub fn below(m: u64, t: f64) -> Self {
        SpectralPoint {
            anchor: m as i64,
            offset: -t,
        }
    }

    pub fn value(self) -> f64 {
        self.anchor as f64 + self.offset
    }

    /// `n - lambda`.
    #[inline]
    pub fn distance_from(self, n: u64) -> f64 {
        (n as i64 - self.anchor) as f64 - self.offset
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecularEvaluation {
    pub lambda: f64,
    pub value: f64,
    pub truncation_bound: u64,
    pub tail_estimate: f64,
    pub error_bound: f64,
}

/// Evaluator for the secular sums over a fixed table.
///
/// The explicit part `sum_{n <= N} r2(n) / (n - lambda)` is summed with a
/// binary tree of moment expansions over `[0, 2^top)`; blocks far from
/// `lambda` contribute through their moments and only the blocks next to it
/// are summed term by term.
pub struct SecularEngine<'a> {
    table: &'a SumsOfTwoSquaresTable,
    top: u32,
    moments: Vec<Vec<f64>>,
    k_prefix: Vec<f64>,
    deltas: Vec<[f64; 4]>,
}

struct TreeSums {
    value: f64,
    deriv: f64,
}

fn binomial_shift(sign: f64) -> [[f64; ORDER]; ORDER] {
    let mut binom = [[0.0f64; ORDER]; ORDER];
    for i in 0..ORDER {
        binom[i][0] = 1.0;
        for j in 1..=i {
            binom[i][j] = binom[i - 1][j - 1] + if j < i { binom[i - 1][j] } else { 0.0 };
        }
    }
    let mut m = [[0.0f64; ORDER]; ORDER];
    for i in 0..ORDER {
        for j in 0..=i {
            m[i][j] = binom[i][j] * 0.5f64.powi(j as i32) * (0.25 * sign).powi((i - j) as i32);
        }
    }
    m
}

impl<'a> SecularEngine<'a> {
    pub fn new(table: &'a SumsOfTwoSquaresTable) -> Result<Self> {
        let top = 63 - table.limit().leading_zeros();
        if top < LEAF_LEVEL + 4 {
            return Err(Error::Config(format!(
                "secular evaluation needs a table limit of at least {}",
                1u64 << (LEAF_LEVEL + 4)
            )));
        }
        let r2 = table.r2_slice();
        let leaf_w = 1usize << LEAF_LEVEL;
        let n_leaves = 1usize << (top - LEAF_LEVEL);
        let mut leaves = vec![0.0f64; n_leaves * ORDER];
        leaves
            .par_chunks_mut(ORDER)
            .enumerate()
            .for_each(|(idx, mu)| {
                let a = idx * leaf_w;
                let c = a as f64 + (leaf_w as f64 - 1.0) / 2.0;
                for n in a..a + leaf_w {
                    let r = r2[n];
                    if r == 0 {
                        continue;
                    }
                    let u = (n as f64 - c) / leaf_w as f64;
                    let mut p = r as f64;
                    for m in mu.iter_mut() {
                        *m += p;
                        p *= u;
                    }
                }
            });
        let left = binomial_shift(-1.0);
        let right = binomial_shift(1.0);
        let mut moments = vec![leaves];
        for _ in LEAF_LEVEL + 1..=top {
            let child = moments.last().unwrap();
            let mut parent = vec![0.0f64; child.len() / 2];
            parent
                .par_chunks_mut(ORDER)
                .enumerate()
                .for_each(|(idx, mu)| {
                    let lc = &child[2 * idx * ORDER..(2 * idx + 1) * ORDER];
                    let rc = &child[(2 * idx + 1) * ORDER..(2 * idx + 2) * ORDER];
                    for i in 0..ORDER {
                        let mut acc = 0.0;
                        for j in 0..=i {
                            acc += left[i][j] * lc[j] + right[i][j] * rc[j];
                        }
                        mu[i] = acc;
                    }
                });
            moments.push(parent);
        }

        let mut k_prefix = vec![0.0f64; top as usize + 1];
        let mut deltas = vec![[0.0f64; 4]; top as usize + 1];
        let (mut k_sum, mut k_comp) = (0.0f64, 0.0f64);
        let mut p = [DoubleDouble::ZERO; 4];
        let mut next_level = 0usize;
        for n in 1..=(1u64 << top) {
            let r = r2[n as usize];
            if r > 0 {
                let x = n as f64;
                let term = r as f64 * x / (x * x + 1.0);
                let t = k_sum + term;
                k_comp += if k_sum.abs() >= term.abs() {
                    (k_sum - t) + term
                } else {
                    (term - t) + k_sum
                };
                k_sum = t;
                let inv = DoubleDouble::recip_u64(n);
                let mut pw = inv * inv;
                for ps in p.iter_mut() {
                    *ps = *ps + pw.scale(r as f64);
                    pw = pw * inv;
                }
            }
            if n == 1 << next_level {
                k_prefix[next_level] = k_sum + k_comp;
                for (s, d) in deltas[next_level].iter_mut().enumerate() {
                    let s = s + 2;
                    let closed =
                        DoubleDouble::PI.div_f64((s - 1) as f64 * (n as f64).powi(s as i32 - 1));
                    *d = (lattice_zeta(s) - p[s - 2] - closed).to_f64();
                }
                next_level += 1;
            }
        }
        Ok(SecularEngine {
            table,
            top,
            moments,
            k_prefix,
            deltas,
        })
    }

    pub fn table(&self) -> &'a SumsOfTwoSquaresTable {
        self.table
    }

    /// Largest explicit truncation the table supports.
    pub fn max_truncation(&self) -> u64 {
        1 << self.top
    }

    fn tree_sums(&self, level: u32, p: SpectralPoint) -> TreeSums {
        let r2 = self.table.r2_slice();
        let mut out = TreeSums {
            value: 0.0,
            deriv: 0.0,
        };
        let mut stack: Vec<(u32, u64)> = Vec::with_capacity(64);
        if level < LEAF_LEVEL {
            for n in 0..(1u64 << level) {
                let r = r2[n as usize];
                if r > 0 {
                    let d = p.distance_from(n);
                    out.value += r as f64 / d;
                    out.deriv += r as f64 / (d * d);
                }
            }
            return out;
        }
        stack.push((level, 0));
        while let Some((lv, idx)) = stack.pop() {
            let w = 1u64 << lv;
            let a = idx * w;
            let half = (w as f64 - 1.0) / 2.0;
            let dist = p.distance_from(a) + half;
            if dist.abs() >= SEPARATION * w as f64 {
                let mu = &self.moments[(lv - LEAF_LEVEL) as usize]
                    [idx as usize * ORDER..(idx as usize + 1) * ORDER];
                let rho = -(w as f64) / dist;
                let (mut s0, mut s1) = (0.0, 0.0);
                for i in (0..ORDER).rev() {
                    s0 = s0 * rho + mu[i];
                    s1 = s1 * rho + (i + 1) as f64 * mu[i];
                }
                out.value += s0 / dist;
                out.deriv += s1 / (dist * dist);
            } else if lv == LEAF_LEVEL {
                for n in a..a + w {
                    let r = r2[n as usize];
                    if r > 0 {
                        let d = p.distance_from(n);
                        out.value += r as f64 / d;
                        out.deriv += r as f64 / (d * d);
                    }
                }
            } else {
                stack.push((lv - 1, 2 * idx));
                stack.push((lv - 1, 2 * idx + 1));
            }
        }
        out
    }

    fn check_pole(&self, p: SpectralPoint) -> Result<()> {
        let lambda = p.value();
        let base = lambda.floor();
        for cand in [base - 1.0, base, base + 1.0, base + 2.0] {
            if cand < 0.0 {
                continue;
            }
            let n = cand as u64;
            if self.table.contains(n) && p.distance_from(n).abs() < POLE_GUARD {
                return Err(Error::PoleProximity {
                    lambda,
                    pole: n,
                    distance: p.distance_from(n).abs(),
                });
            }
        }
        Ok(())
    }

    fn truncation_level(&self, lambda: f64, tol: f64, deriv: bool) -> Result<u32> {
        let start = (4.0 * lambda.abs()).max(lambda.abs() + 1e4).ceil() as u64;
        let mut level = 64 - (start.max(2) - 1).leading_zeros();
        loop {
            if level > self.top {
                return Err(Error::WindowExceedsTable {
                    needed: 1u64 << level.min(62),
                    limit: self.table.limit(),
                });
            }
            let n = (1u64 << level) as f64;
            if truncation_bound(lambda, n, deriv) <= tol {
                return Ok(level);
            }
            level += 1;
        }
    }

    /// Weak-coupling secular function `F(lambda)`.
    pub fn weak(&self, p: SpectralPoint, tol: f64) -> Result<SecularEvaluation> {
        Ok(self.weak_with_derivative(p, tol)?.0)
    }

    /// `F(lambda)` and `F'(lambda)`, both to within `tol`.
    pub fn weak_with_derivative(
        &self,
        p: SpectralPoint,
        tol: f64,
    ) -> Result<(SecularEvaluation, f64)> {
        self.check_pole(p)?;
        let lambda = p.value();
        let level = self
            .truncation_level(lambda, tol, false)?
            .max(self.truncation_level(lambda, tol, true)?);
        Ok(self.weak_at_level(p, level))
    }

    /// `F(lambda)` with the explicit sum cut at `2^level` (no tolerance search).
    pub fn weak_at_truncation(&self, p: SpectralPoint, n: u64) -> Result<(SecularEvaluation, f64)> {
        self.check_pole(p)?;
        if !n.is_power_of_two() || n > self.max_truncation() {
            return Err(Error::WindowExceedsTable {
                needed: n,
                limit: self.table.limit(),
            });
        }
        if (n as f64) < 2.0 * p.value().abs() {
            return Err(Error::Config(format!(
                "truncation {n} is too close to lambda = {}",
                p.value()
            )));
        }
        Ok(self.weak_at_level(p, n.trailing_zeros()))
    }

    fn weak_at_level(&self, p: SpectralPoint, level: u32) -> (SecularEvaluation, f64) {
        let lambda = p.value();
        let n = 1u64 << level;
        let nf = n as f64;
        let sums = self.tree_sums(level, p);
        let r_top = self.table.r2_at(n) as f64;
        let d_top = p.distance_from(n);
        let explicit = sums.value + r_top / d_top - self.k_prefix[level as usize];
        let explicit_deriv = sums.deriv + r_top / (d_top * d_top);

        let del = &self.deltas[level as usize];
        let (l2, l3) = (lambda * lambda, lambda * lambda * lambda);
        let coeffs = [lambda, l2 + 1.0, l3, l3 * lambda - 1.0];
        let dcoeffs = [1.0, 2.0 * lambda, 3.0 * l2, 4.0 * l3];
        let mut fluct = 0.0;
        let mut dfluct = 0.0;
        let mut dd_err = 0.0;
        for i in 0..4 {
            fluct += coeffs[i] * del[i];
            dfluct += dcoeffs[i] * del[i];
            dd_err += (coeffs[i].abs() + dcoeffs[i].abs()) * 1e-31 * lattice_zeta(i + 2).hi;
        }
        let smooth = -PI * ((-lambda / nf).ln_1p() - 0.5 * (1.0 / (nf * nf)).ln_1p());
        let tail = smooth + fluct;
        let round = 1e-15 * (1.0 + self.k_prefix[level as usize] + sums.value.abs());
        let eval = SecularEvaluation {
            lambda,
            value: explicit + tail,
            truncation_bound: n,
            tail_estimate: tail,
            error_bound: truncation_bound(lambda, nf, false) + dd_err + round,
        };
        let deriv = explicit_deriv + PI / (nf - lambda) + dfluct;
        (eval, deriv)
    }

    /// Windowed sum over `|n - n_+| <= n_+^delta` with `n_+` the first element
    /// of S above `lambda`; exact, no tail.
    pub fn strong(&self, p: SpectralPoint, delta: f64) -> Result<(SecularEvaluation, f64)> {
        self.check_pole(p)?;
        let lambda = p.value();
        let limit = self.table.limit();
        let n_plus = if lambda < 0.0 {
            0
        } else {
            let from = lambda.floor() as u64 + 1;
            self.table
                .next_member(from)
                .ok_or(Error::WindowExceedsTable {
                    needed: from,
                    limit,
                })?
        };
        let radius = window_radius(n_plus, delta);
        let hi = n_plus + radius;
        if hi > limit {
            return Err(Error::WindowExceedsTable { needed: hi, limit });
        }
        let (mut value, mut deriv) = (0.0, 0.0);
        for n in self.table.members(n_plus.saturating_sub(radius), hi) {
            let r = self.table.r2_at(n) as f64;
            let d = p.distance_from(n);
            let x = n as f64;
            value += r * (1.0 / d - x / (x * x + 1.0));
            deriv += r / (d * d);
        }
        Ok((
            SecularEvaluation {
                lambda,
                value,
                truncation_bound: hi,
                tail_estimate: 0.0,
                error_bound: 1e-15 * (1.0 + deriv.sqrt() * 4.0 + value.abs()),
            },
            deriv,
        ))
    }

    /// Secular function of the configured mode, with its derivative.
    pub fn evaluate(
        &self,
        cfg: &CouplingConfig,
        p: SpectralPoint,
        tol: f64,
    ) -> Result<(SecularEvaluation, f64)> {
        match cfg.mode {
            CouplingMode::Weak => self.weak_with_derivative(p, tol),
            CouplingMode::Strong => self.strong(p, cfg.delta),
        }
    }

    /// `F'(lambda) = sum_n r2(n) / (n - lambda)^2`, which also normalises
    /// the Green's function.
    pub fn derivative(&self, p: SpectralPoint, tol: f64) -> Result<f64> {
        self.check_pole(p)?;
        let level = self.truncation_level(p.value(), tol, true)?;
        Ok(self.weak_at_level(p, level).1)
    }
}

/// `floor(n^delta)`, snapping to an integer when `n^delta` is one up to
/// rounding.
pub(crate) fn window_radius(n: u64, delta: f64) -> u64 {
    if n == 0 {
        return 0;
    }
    let h = (n as f64).powf(delta);
    let r = h.round();
    if (h - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        h.floor() as u64
    }
}

/// Bound on the neglected terms `s >= 6` of the moment expansion of the tail
/// beyond `n`, using `|delta_s(N)| <= 3 C sqrt(N) N^-s`.
fn truncation_bound(lambda: f64, n: f64, deriv: bool) -> f64 {
    let ratio = lambda.abs() / n;
    let mut sum = 0.0;
    // ratio^(s-2) and N^-s at s = 6
    let mut rpow = ratio.powi(4);
    let mut npow = n.powi(-6);
    for s in 6..=80 {
        let term = if deriv {
            (s - 1) as f64 * rpow / (n * n)
        } else {
            rpow * ratio / n + npow
        };
        sum += term;
        rpow *= ratio;
        npow /= n;
        if term <= 1e-30 * sum {
            break;
        }
    }
    3.0 * FLUCTUATION_CONSTANT * n.sqrt() * sum
}
