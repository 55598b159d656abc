//! Double-double arithmetic, used where lattice zeta sums are subtracted
//! from their closed forms and the difference is then multiplied by large
//! powers of the spectral parameter.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const PI: DoubleDouble = DoubleDouble {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };

    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// `1 / n` to roughly 106 bits.
    pub fn recip_u64(n: u64) -> Self {
        debug_assert!(n > 0 && n < (1 << 53));
        let d = n as f64;
        let q = 1.0 / d;
        let r = (-q).mul_add(d, 1.0);
        let (hi, lo) = quick_two_sum(q, r / d);
        DoubleDouble { hi, lo }
    }

    pub fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = q1 * d;
        let e = q1.mul_add(d, -p);
        let (s, t) = two_sum(self.hi, -p);
        let rem = s + (t - e + self.lo);
        let (hi, lo) = quick_two_sum(q1, rem / d);
        DoubleDouble { hi, lo }
    }

    pub fn scale(self, f: f64) -> Self {
        self * DoubleDouble::from_f64(f)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_round_trips() {
        for n in [3u64, 7, 10, 12_345, 9_999_991] {
            let r = DoubleDouble::recip_u64(n) * DoubleDouble::from_f64(n as f64);
            let err = (r - DoubleDouble::from_f64(1.0)).to_f64().abs();
            assert!(err < 1e-30, "n = {n}: {err:e}");
        }
    }

    #[test]
    fn cancellation_keeps_low_part() {
        let third = DoubleDouble::from_f64(1.0).div_f64(3.0);
        let back = third.scale(3.0) - DoubleDouble::from_f64(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        let a = DoubleDouble::from_f64(1.0) + DoubleDouble::from_f64(1e-20);
        let b = a - DoubleDouble::from_f64(1.0);
        assert!((b.to_f64() - 1e-20).abs() < 1e-35);
    }
}
