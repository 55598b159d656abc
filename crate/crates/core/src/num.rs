//! Small integer and floating-point helpers shared by the modules.

use num_complex::Complex64;

/// Floor of the square root of `n`.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Returns `Some(r)` when `n = r * r`.
pub fn exact_sqrt(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `((a + ib) / |a + ib|)^k` by repeated multiplication of the unit phase.
///
/// The running product is renormalised every 64 steps. The zero vector
/// maps to 1 (the convention used for the zero frequency).
pub fn unit_power(a: i64, b: i64, k: i64) -> Complex64 {
    if k == 0 || (a == 0 && b == 0) {
        return Complex64::new(1.0, 0.0);
    }
    let norm = ((a as f64).powi(2) + (b as f64).powi(2)).sqrt();
    let mut z = Complex64::new(a as f64 / norm, b as f64 / norm);
    if k < 0 {
        z = z.conj();
    }
    let mut acc = z;
    for step in 1..k.unsigned_abs() {
        acc *= z;
        if step % 64 == 0 {
            acc /= acc.norm();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_edges() {
        for n in 0..10_000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), 4_294_967_295);
        assert_eq!(exact_sqrt(49), Some(7));
        assert_eq!(exact_sqrt(50), None);
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5_000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
    }

    #[test]
    fn unit_power_diagonal() {
        let z = unit_power(1, 1, 4);
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let z = unit_power(3, 4, -1);
        assert!((z - Complex64::new(0.6, -0.8)).norm() < 1e-15);
        let z = unit_power(2, 1, 1000);
        assert!((z.norm() - 1.0).abs() < 1e-12);
        let angle = (1.0f64).atan2(2.0) * 1000.0;
        assert!((z - Complex64::from_polar(1.0, angle)).norm() < 1e-9);
    }
}
