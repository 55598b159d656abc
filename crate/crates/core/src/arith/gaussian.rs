use crate::error::{Error, Result};
use crate::num::{exact_sqrt, is_prime, isqrt, pow_mod};

/// Canonical representation `p = x^2 + y^2` with `0 <= y <= x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianRep {
    pub p: u64,
    pub x: u64,
    pub y: u64,
    /// Angle of `x + iy`, in `[0, pi/4)` for split primes.
    pub theta: f64,
    /// Set only for `p = 2`, whose angle is exactly `pi/4`.
    pub special: bool,
}

impl GaussianRep {
    fn canonical(p: u64, a: u64, b: u64) -> Self {
        let (x, y) = if a >= b { (a, b) } else { (b, a) };
        GaussianRep {
            p,
            x,
            y,
            theta: (y as f64).atan2(x as f64),
            special: p == 2,
        }
    }
}

const BRUTE_FORCE_BELOW: u64 = 1_000_000;

/// Two-square decomposition of a prime `p = 2` or `p = 1 mod 4`.
///
/// Cornacchia descent from a square root of -1 mod p; a direct search is
/// kept as a fallback for small primes.
pub fn two_square_rep(p: u64) -> Result<GaussianRep> {
    if p == 2 {
        return Ok(GaussianRep::canonical(2, 1, 1));
    }
    if p % 4 != 1 {
        return Err(Error::Domain(format!(
            "{p} is not 2 or congruent to 1 mod 4"
        )));
    }
    if p >= 1 << 62 {
        return Err(Error::Domain(format!("{p} exceeds the supported range")));
    }
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is composite")));
    }
    if let Some((a, b)) = cornacchia(p) {
        return Ok(GaussianRep::canonical(p, a, b));
    }
    if p < BRUTE_FORCE_BELOW {
        if let Some((a, b)) = brute_force(p) {
            return Ok(GaussianRep::canonical(p, a, b));
        }
    }
    Err(Error::Domain(format!(
        "no two-square representation found for {p}"
    )))
}

fn sqrt_minus_one(p: u64) -> Option<u64> {
    // p = 1 mod 4: c^((p-1)/4) squares to -1 for any non-residue c.
    (2..p).find_map(|c| {
        if pow_mod(c, (p - 1) / 2, p) == p - 1 {
            Some(pow_mod(c, (p - 1) / 4, p))
        } else {
            None
        }
    })
}

fn cornacchia(p: u64) -> Option<(u64, u64)> {
    let mut r0 = p;
    let mut r1 = sqrt_minus_one(p)?;
    if r1 > p / 2 {
        r1 = p - r1;
    }
    let bound = isqrt(p);
    while r1 > bound {
        let r2 = r0 % r1;
        r0 = r1;
        r1 = r2;
    }
    let b = exact_sqrt(p - r1 * r1)?;
    Some((r1, b))
}

fn brute_force(p: u64) -> Option<(u64, u64)> {
    (0..=isqrt(p)).find_map(|y| exact_sqrt(p - y * y).map(|x| (x, y)))
}
