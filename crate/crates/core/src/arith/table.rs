use std::sync::OnceLock;

use rayon::prelude::*;

use super::expsum::ExponentialSumValue;
use super::gaussian::two_square_rep;
use crate::error::{Error, Result};

/// Largest supported table limit. Beyond this the per-n arrays no longer
/// fit a desk machine (about 9 bytes per entry).
pub const MAX_LIMIT: u64 = 1 << 31;

const CHUNK: usize = 1 << 16;

/// Exact arithmetic data for every `n` in `[0, limit]`.
pub struct SumsOfTwoSquaresTable {
    limit: u64,
    membership: Vec<u64>,
    r2: Vec<u32>,
    omega1: Vec<u8>,
    spf: Vec<u32>,
    angles: OnceLock<Vec<(u32, f64)>>,
}

impl std::fmt::Debug for SumsOfTwoSquaresTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SumsOfTwoSquaresTable")
            .field("limit", &self.limit)
            .finish_non_exhaustive()
    }
}

/// Tables compare equal when their stored arrays do.
impl PartialEq for SumsOfTwoSquaresTable {
    fn eq(&self, other: &Self) -> bool {
        self.limit == other.limit
            && self.membership == other.membership
            && self.r2 == other.r2
            && self.omega1 == other.omega1
    }
}

/// The four nearest elements of S around `m`; `None` past the table edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NeighborSet {
    pub m: u64,
    pub m_minus2: Option<u64>,
    pub m_minus: Option<u64>,
    pub m_plus: Option<u64>,
    pub m_plus2: Option<u64>,
}

fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    if limit >= 1 {
        spf[1] = 1;
    }
    let mut i = 2usize;
    while i <= limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            if let Some(sq) = i.checked_mul(i) {
                let mut j = sq;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        i += 1;
    }
    spf
}

/// `(r2(n) / 4, omega1(n))` from the factorisation, `(0, _)` off S.
fn arithmetic_of(spf: &[u32], n: usize) -> (u32, u8) {
    let mut m = n;
    let mut quarter = 1u32;
    let mut omega = 0u8;
    while m > 1 {
        let p = spf[m] as usize;
        let mut e = 0u32;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        match p % 4 {
            1 => {
                quarter *= e + 1;
                omega += 1;
            }
            3 if e % 2 == 1 => quarter = 0,
            _ => {}
        }
    }
    (quarter, omega)
}

impl SumsOfTwoSquaresTable {
    /// Sieve the table up to `limit` inclusive.
    pub fn build(limit: u64) -> Result<Self> {
        if limit == 0 {
            return Err(Error::Config("table limit must be at least 1".into()));
        }
        if limit > MAX_LIMIT {
            return Err(Error::Config(format!(
                "table limit {limit} exceeds the supported maximum {MAX_LIMIT}"
            )));
        }
        let len = limit as usize + 1;
        let spf = smallest_prime_factors(limit as usize);
        let mut r2 = vec![0u32; len];
        let mut omega1 = vec![0u8; len];
        r2.par_chunks_mut(CHUNK)
            .zip(omega1.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(c, (r2c, omc))| {
                let base = c * CHUNK;
                for (i, (r, o)) in r2c.iter_mut().zip(omc.iter_mut()).enumerate() {
                    let n = base + i;
                    if n == 0 {
                        *r = 1;
                        continue;
                    }
                    let (q, w) = arithmetic_of(&spf, n);
                    *r = 4 * q;
                    *o = w;
                }
            });
        let membership = bitmap_from_r2(&r2);
        Ok(SumsOfTwoSquaresTable {
            limit,
            membership,
            r2,
            omega1,
            spf,
            angles: OnceLock::new(),
        })
    }

    /// Reassemble a table from stored arrays, re-sieving the factor data.
    pub(crate) fn from_parts(
        limit: u64,
        membership: Vec<u64>,
        r2: Vec<u32>,
        omega1: Vec<u8>,
    ) -> Result<Self> {
        if limit == 0 || limit > MAX_LIMIT {
            return Err(Error::Cache(format!(
                "stored limit {limit} is out of range"
            )));
        }
        let len = limit as usize + 1;
        if r2.len() != len || omega1.len() != len || membership.len() != len.div_ceil(64) {
            return Err(Error::Cache(
                "array lengths do not match the stored limit".into(),
            ));
        }
        if bitmap_from_r2(&r2) != membership {
            return Err(Error::Cache("membership bitmap disagrees with r2".into()));
        }
        if r2[0] != 1 || r2[1..].iter().any(|&r| r % 4 != 0) {
            return Err(Error::Cache("r2 values violate the unit symmetry".into()));
        }
        Ok(SumsOfTwoSquaresTable {
            limit,
            membership,
            r2,
            omega1,
            spf: smallest_prime_factors(limit as usize),
            angles: OnceLock::new(),
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub(crate) fn membership_words(&self) -> &[u64] {
        &self.membership
    }

    pub(crate) fn r2_slice(&self) -> &[u32] {
        &self.r2
    }

    pub(crate) fn omega1_slice(&self) -> &[u8] {
        &self.omega1
    }

    fn check(&self, what: &'static str, n: u64, lo: u64) -> Result<usize> {
        if n < lo || n > self.limit {
            return Err(Error::Range {
                what,
                value: n as i128,
                lo,
                hi: self.limit,
            });
        }
        Ok(n as usize)
    }

    /// Membership in S. Values past the limit report `false`.
    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        n <= self.limit && (self.membership[(n >> 6) as usize] >> (n & 63)) & 1 == 1
    }

    pub fn r2(&self, n: u64) -> Result<u32> {
        Ok(self.r2[self.check("n", n, 0)?])
    }

    /// `r2(n)` without the range check; panics past the limit.
    #[inline]
    pub fn r2_at(&self, n: u64) -> u32 {
        self.r2[n as usize]
    }

    pub fn omega1(&self, n: u64) -> Result<u32> {
        Ok(self.omega1[self.check("n", n, 1)?] as u32)
    }

    #[inline]
    pub fn omega1_at(&self, n: u64) -> u32 {
        self.omega1[n as usize] as u32
    }

    /// Prime factorisation `[(p, e)]` in increasing order of `p`.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        let mut m = self.check("n", n, 1)?;
        let mut out = Vec::new();
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    fn angle_table(&self) -> &[(u32, f64)] {
        self.angles.get_or_init(|| {
            let primes: Vec<u32> = (5..=self.limit as usize)
                .step_by(4)
                .filter(|&p| self.spf[p] as usize == p)
                .map(|p| p as u32)
                .collect();
            primes
                .par_iter()
                .map(|&p| {
                    let rep = two_square_rep(p as u64).expect("split prime has a representation");
                    (p, rep.theta)
                })
                .collect()
        })
    }

    /// The angle of a split prime `p <= limit`.
    pub fn angle(&self, p: u64) -> Result<f64> {
        let table = self.angle_table();
        let key = u32::try_from(p).map_err(|_| Error::Domain(format!("{p} is out of range")))?;
        table
            .binary_search_by_key(&key, |&(q, _)| q)
            .map(|i| table[i].1)
            .map_err(|_| {
                Error::Domain(format!(
                    "{p} is not a prime congruent to 1 mod 4 within the table"
                ))
            })
    }

    /// `w_k(n) / 4` from the prime-power factors; 0 unless `4 | k`.
    pub fn wk_quarter(&self, n: u64, k: i64) -> f64 {
        debug_assert!(n >= 1 && n <= self.limit);
        if k % 4 != 0 || self.r2[n as usize] == 0 {
            return 0.0;
        }
        if k == 0 {
            return (self.r2[n as usize] / 4) as f64;
        }
        let angles = self.angle_table();
        let mut m = n as usize;
        let mut acc = 1.0f64;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            match p % 4 {
                1 => {
                    let i = angles
                        .binary_search_by_key(&(p as u32), |&(q, _)| q)
                        .expect("split prime in angle table");
                    acc *= dirichlet_kernel(e, (k as f64 * angles[i].1).cos());
                }
                2 => {
                    if (k / 4).rem_euclid(2) == 1 && e % 2 == 1 {
                        acc = -acc;
                    }
                }
                _ => {}
            }
        }
        acc
    }

    /// `w_k(n)` via multiplicativity.
    pub fn wk(&self, n: u64, k: i64) -> Result<ExponentialSumValue> {
        self.check("n", n, 1)?;
        Ok(ExponentialSumValue {
            n,
            k,
            value: 4.0 * self.wk_quarter(n, k),
        })
    }

    /// Smallest element of S that is `>= n`, if within the table.
    pub fn next_member(&self, n: u64) -> Option<u64> {
        if n > self.limit {
            return None;
        }
        let mut w = (n >> 6) as usize;
        let mut bits = self.membership[w] & (!0u64 << (n & 63));
        loop {
            if bits != 0 {
                let m = ((w as u64) << 6) + bits.trailing_zeros() as u64;
                return (m <= self.limit).then_some(m);
            }
            w += 1;
            if w >= self.membership.len() {
                return None;
            }
            bits = self.membership[w];
        }
    }

    /// Largest element of S that is `<= n` (clamped to the limit).
    pub fn prev_member(&self, n: u64) -> Option<u64> {
        let n = n.min(self.limit);
        let mut w = (n >> 6) as usize;
        let shift = 63 - (n & 63);
        let mut bits = (self.membership[w] << shift) >> shift;
        loop {
            if bits != 0 {
                return Some(((w as u64) << 6) + 63 - bits.leading_zeros() as u64);
            }
            if w == 0 {
                return None;
            }
            w -= 1;
            bits = self.membership[w];
        }
    }

    /// Nearest two S-neighbours on each side of `m`.
    pub fn neighbors(&self, m: u64) -> Result<NeighborSet> {
        self.check("m", m, 1)?;
        if !self.contains(m) {
            return Err(Error::Domain(format!("{m} is not a sum of two squares")));
        }
        let m_minus = m.checked_sub(1).and_then(|x| self.prev_member(x));
        let m_minus2 = m_minus
            .and_then(|x| x.checked_sub(1))
            .and_then(|x| self.prev_member(x));
        let m_plus = self.next_member(m + 1);
        let m_plus2 = m_plus.and_then(|x| self.next_member(x + 1));
        Ok(NeighborSet {
            m,
            m_minus2,
            m_minus,
            m_plus,
            m_plus2,
        })
    }

    /// Elements of S in `[lo, hi]`, ascending.
    pub fn members(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.limit);
        let mut next = if lo <= hi { self.next_member(lo) } else { None };
        std::iter::from_fn(move || {
            let cur = next.filter(|&c| c <= hi)?;
            next = self.next_member(cur + 1);
            Some(cur)
        })
    }

    /// `|S ∩ [1, limit]|`.
    pub fn count(&self) -> u64 {
        self.membership
            .iter()
            .map(|w| w.count_ones() as u64)
            .sum::<u64>()
            - 1
    }
}

/// `sin((e+1)t) / sin(t)` at `c = cos t`, by the three-term recurrence.
fn dirichlet_kernel(e: u32, c: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * c);
    if e == 0 {
        return prev;
    }
    for _ in 1..e {
        let next = 2.0 * c * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn bitmap_from_r2(r2: &[u32]) -> Vec<u64> {
    r2.par_chunks(64)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u64, |w, (i, &r)| if r > 0 { w | (1 << i) } else { w })
        })
        .collect()
}

/// Convenience wrapper for [`SumsOfTwoSquaresTable::build`].
pub fn build_table(limit: u64) -> Result<SumsOfTwoSquaresTable> {
    SumsOfTwoSquaresTable::build(limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{lattice_points, wk_direct};

    #[test]
    fn small_membership() {
        let t = build_table(30).unwrap();
        let s: Vec<u64> = t.members(0, 30).collect();
        assert_eq!(s, [0, 1, 2, 4, 5, 8, 9, 10, 13, 16, 17, 18, 20, 25, 26, 29]);
        let t = build_table(1).unwrap();
        assert_eq!(t.members(0, 1).collect::<Vec<_>>(), [0, 1]);
        assert_eq!(t.r2(1).unwrap(), 4);
        assert!(build_table(0).is_err());
        assert!(build_table(MAX_LIMIT + 1).is_err());
    }

    #[test]
    fn r2_and_omega1_against_enumeration() {
        let t = build_table(3000).unwrap();
        for n in 0..=3000u64 {
            assert_eq!(
                t.r2(n).unwrap() as usize,
                lattice_points(n).points.len(),
                "n = {n}"
            );
        }
        assert_eq!(t.r2(5).unwrap(), 8);
        assert_eq!(t.r2(3).unwrap(), 0);
        assert_eq!(t.r2(25).unwrap(), 12);
        assert_eq!(t.omega1(65).unwrap(), 2);
        assert_eq!(t.omega1(9).unwrap(), 0);
        assert_eq!(t.omega1(10).unwrap(), 1);
        assert!(t.omega1(0).is_err());
        assert!(t.r2(3001).is_err());
    }

    #[test]
    fn wk_against_direct_sum() {
        let t = build_table(5000).unwrap();
        for n in 1..=5000u64 {
            for k in [-8i64, -4, 0, 2, 4, 6, 8, 12, 20, 36] {
                let fast = t.wk(n, k).unwrap().value;
                let slow = wk_direct(n, k).value;
                let scale = (t.r2_at(n) as f64).max(1.0);
                assert!(
                    (fast - slow).abs() <= 1e-8 * scale,
                    "n={n} k={k}: {fast} vs {slow}"
                );
            }
        }
        assert_eq!(t.wk(9, 4).unwrap().value, 4.0);
        assert!((t.wk(65, 4).unwrap().value - 13328.0 / 4225.0).abs() < 1e-12);
    }

    #[test]
    fn neighbor_examples() {
        let t = build_table(100).unwrap();
        let nb = t.neighbors(25).unwrap();
        assert_eq!(
            (nb.m_minus2, nb.m_minus, nb.m_plus, nb.m_plus2),
            (Some(18), Some(20), Some(26), Some(29))
        );
        let nb = t.neighbors(1).unwrap();
        assert_eq!(
            (nb.m_minus2, nb.m_minus, nb.m_plus, nb.m_plus2),
            (None, Some(0), Some(2), Some(4))
        );
        assert!(matches!(t.neighbors(7), Err(Error::Domain(_))));
        let nb = t.neighbors(100).unwrap();
        assert_eq!((nb.m_plus, nb.m_plus2), (None, None));
        assert_eq!(t.count(), 43);
    }

    #[test]
    fn dirichlet_kernel_matches_closed_form() {
        for e in 0..12 {
            for &t in &[0.3f64, 1.1, 2.0, 2.9] {
                let closed = ((e + 1) as f64 * t).sin() / t.sin();
                assert!((dirichlet_kernel(e, t.cos()) - closed).abs() < 1e-11);
            }
            assert_eq!(dirichlet_kernel(e, 1.0), (e + 1) as f64);
            let alt = if e % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(dirichlet_kernel(e, -1.0), alt * (e + 1) as f64);
        }
    }
}
