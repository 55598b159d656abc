use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::num::unit_power;

/// Finitely supported Fourier data on `Z^2`.
pub type FourierMap = BTreeMap<(i64, i64), Complex64>;

/// A phase-space observable `a(x, phi) = sum a(zeta, k) e^{i<zeta,x> + i k phi}`
/// with finitely many terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Observable {
    terms: BTreeMap<((i64, i64), i64), Complex64>,
}

impl Observable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The single exponential `e_{zeta,k}`.
    pub fn exponential(zeta: (i64, i64), k: i64) -> Self {
        let mut o = Self::new();
        o.add_term(zeta, k, Complex64::new(1.0, 0.0));
        o
    }

    pub fn add_term(&mut self, zeta: (i64, i64), k: i64, coeff: Complex64) -> &mut Self {
        let e = self
            .terms
            .entry((zeta, k))
            .or_insert(Complex64::new(0.0, 0.0));
        *e += coeff;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(zeta, k));
        }
        self
    }

    pub fn coefficient(&self, zeta: (i64, i64), k: i64) -> Complex64 {
        self.terms.get(&(zeta, k)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i64, i64), i64, Complex64)> + '_ {
        self.terms.iter().map(|(&(z, k), &c)| (z, k, c))
    }

    /// Largest `max(|zeta_1|, |zeta_2|, |k|)` over the support.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|&((a, b), k)| a.abs().max(b.abs()).max(k.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Truncation `P_J` keeping the terms of degree at most `j`.
    pub fn truncate(&self, j: i64) -> Self {
        Observable {
            terms: self
                .terms
                .iter()
                .filter(|(&((a, b), k), _)| a.abs().max(b.abs()).max(k.abs()) <= j)
                .map(|(&key, &c)| (key, c))
                .collect(),
        }
    }

    /// `sum |a(zeta, k)|` over the terms dropped by `truncate(j)`.
    pub fn truncation_mass(&self, j: i64) -> f64 {
        self.terms
            .iter()
            .filter(|(&((a, b), k), _)| a.abs().max(b.abs()).max(k.abs()) > j)
            .map(|(_, c)| c.norm())
            .sum()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = Self::new();
        for (z, k, c) in self.terms() {
            out.add_term(z, k, c * s);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (z, k, c) in other.terms() {
            out.add_term(z, k, c);
        }
        out
    }

    /// True when `a(-zeta, -k) = conj(a(zeta, k))` to within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms()
            .all(|((a, b), k, c)| (self.coefficient((-a, -b), -k) - c.conj()).norm() <= tol)
    }
}

/// Fourier coefficients of `Op(a) f` from those of `f`.
///
/// Each term `(zeta, k)` sends the coefficient at `eta` to `eta + zeta`
/// multiplied by `(eta~/|eta~|)^k`; the zero frequency is carried with
/// multiplier 1.
pub fn apply_op(obs: &Observable, input: &FourierMap) -> FourierMap {
    let mut out = FourierMap::new();
    for ((z1, z2), k, a) in obs.terms() {
        for (&(e1, e2), &f) in input {
            let v = a * unit_power(e1, e2, k) * f;
            *out.entry((e1 + z1, e2 + z2))
                .or_insert(Complex64::new(0.0, 0.0)) += v;
        }
    }
    out
}
