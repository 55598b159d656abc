use crate::num::{exact_sqrt, isqrt, unit_power};

/// The Gaussian integers of norm `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePointSet {
    pub n: u64,
    pub points: Vec<(i64, i64)>,
}

/// One value of `w_k(n) = sum over |z|^2 = n of (z/|z|)^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialSumValue {
    pub n: u64,
    pub k: i64,
    pub value: f64,
}

/// All `(a, b)` with `a^2 + b^2 = n`, by direct enumeration.
pub fn lattice_points(n: u64) -> LatticePointSet {
    let mut points = Vec::new();
    let r = isqrt(n) as i64;
    for a in -r..=r {
        if let Some(b) = exact_sqrt(n - (a * a) as u64) {
            let b = b as i64;
            points.push((a, b));
            if b != 0 {
                points.push((a, -b));
            }
        }
    }
    LatticePointSet { n, points }
}

/// `w_k(n)` summed point by point over `lattice_points(n)`.
pub fn wk_direct(n: u64, k: i64) -> ExponentialSumValue {
    let set = lattice_points(n);
    let sum = set
        .points
        .iter()
        .map(|&(a, b)| unit_power(a, b, k))
        .fold(num_complex::Complex64::new(0.0, 0.0), |acc, z| acc + z);
    debug_assert!(
        sum.im.abs() <= 1e-10 * (set.points.len().max(1) as f64) * (k.unsigned_abs().max(1) as f64),
        "imaginary part {} for n = {n}, k = {k}",
        sum.im
    );
    ExponentialSumValue {
        n,
        k,
        value: sum.re,
    }
}
