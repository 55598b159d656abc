use rayon::prelude::*;
use serde::Serialize;

use super::dyadic_checkpoints;
use crate::arith::SumsOfTwoSquaresTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LandauCheckpoint {
    pub x: u64,
    pub count: u64,
    /// `|S(x)| sqrt(log x) / x`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LandauReport {
    pub checkpoints: Vec<LandauCheckpoint>,
    /// Limit of the ratio estimated from the last two checkpoints under the
    /// model `ratio = c + a / log x`.
    pub extrapolated: f64,
}

fn require(table: &SumsOfTwoSquaresTable, x: u64, min: u64) -> Result<()> {
    if x < min || x > table.limit() {
        return Err(Error::Range {
            what: "x",
            value: x as i128,
            lo: min,
            hi: table.limit(),
        });
    }
    Ok(())
}

fn landau_ratio(count: u64, x: u64) -> f64 {
    count as f64 * (x as f64).ln().sqrt() / x as f64
}

/// `|S(x)|` and the Landau ratio at dyadic and decimal checkpoints.
pub fn landau_report(table: &SumsOfTwoSquaresTable) -> Result<LandauReport> {
    require(table, table.limit(), 1000)?;
    let mut xs = dyadic_checkpoints(1 << 10, table.limit());
    let mut p = 1000u64;
    while p <= table.limit() {
        xs.push(p);
        p *= 10;
    }
    xs.sort_unstable();
    xs.dedup();
    let mut checkpoints = Vec::with_capacity(xs.len());
    let mut count = 0u64;
    let mut prev = 0u64;
    for &x in &xs {
        count += table.members(prev + 1, x).filter(|&n| n >= 1).count() as u64;
        prev = x;
        checkpoints.push(LandauCheckpoint {
            x,
            count,
            ratio: landau_ratio(count, x),
        });
    }
    let n = checkpoints.len();
    let (a, b) = (&checkpoints[n.saturating_sub(2)], &checkpoints[n - 1]);
    let (la, lb) = ((a.x as f64).ln(), (b.x as f64).ln());
    let extrapolated = if lb > la {
        (b.ratio * lb - a.ratio * la) / (lb - la)
    } else {
        b.ratio
    };
    Ok(LandauReport {
        checkpoints,
        extrapolated,
    })
}

/// `c(h) = prod_{p | h, p = 3 mod 4} (1 + 1/p)`.
pub fn singular_constant(table: &SumsOfTwoSquaresTable, h: u64) -> Result<f64> {
    Ok(table
        .factorize(h)?
        .into_iter()
        .filter(|&(p, _)| p % 4 == 3)
        .map(|(p, _)| 1.0 + 1.0 / p as f64)
        .product())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCorrelationReport {
    pub x: u64,
    pub hmax: u64,
    /// `counts[h-1] = #{1 <= n <= x : n, n + h in S}`.
    pub counts: Vec<u64>,
    pub c_values: Vec<f64>,
    /// `count log x / (x c(h))`.
    pub normalized: Vec<f64>,
    /// Counts recomputed by scanning the shifted set downwards agree.
    pub recount_agrees: bool,
}

/// Shifted pair counts of S over `[1, x]`, `1 <= h <= hmax`.
pub fn pair_correlation(
    table: &SumsOfTwoSquaresTable,
    x: u64,
    hmax: u64,
) -> Result<PairCorrelationReport> {
    if hmax == 0 || x < 2 || x.checked_add(hmax).is_none_or(|e| e > table.limit()) {
        return Err(Error::Config(format!(
            "pair correlation needs 1 <= hmax and x + hmax <= table limit {}",
            table.limit()
        )));
    }
    let members: Vec<u64> = table.members(1, x).collect();
    let counts: Vec<u64> = (1..=hmax)
        .into_par_iter()
        .map(|h| members.iter().filter(|&&n| table.contains(n + h)).count() as u64)
        .collect();
    let recount: Vec<u64> = (1..=hmax)
        .into_par_iter()
        .map(|h| {
            let upper: Vec<u64> = table.members(1 + h, x + h).collect();
            upper
                .iter()
                .rev()
                .filter(|&&n| table.contains(n - h))
                .count() as u64
        })
        .collect();
    let c_values = (1..=hmax)
        .map(|h| singular_constant(table, h))
        .collect::<Result<Vec<f64>>>()?;
    let lx = (x as f64).ln();
    let normalized = counts
        .iter()
        .zip(&c_values)
        .map(|(&c, &s)| c as f64 * lx / (x as f64 * s))
        .collect();
    Ok(PairCorrelationReport {
        x,
        hmax,
        recount_agrees: recount == counts,
        counts,
        c_values,
        normalized,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCheckpoint {
    pub x: u64,
    pub gaps: u64,
    pub mean_gap: f64,
    pub median: u64,
    pub q90: u64,
    pub q99: u64,
    pub max_gap: u64,
    pub max_second_gap: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    /// `histogram[g]` counts `m in S(x)` with `m_+ - m = g`, at the largest checkpoint.
    pub histogram: Vec<u64>,
    pub checkpoints: Vec<GapCheckpoint>,
}

fn quantile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Gaps `m_+ - m` and second gaps `m_++ - m_+` over `m in S(x)`.
pub fn gap_stats(table: &SumsOfTwoSquaresTable, x: u64) -> Result<GapReport> {
    require(table, x, 1000)?;
    let members: Vec<u64> = table.members(1, table.limit()).collect();
    let mut checkpoints = Vec::new();
    let mut histogram = Vec::new();
    for cx in dyadic_checkpoints(1 << 10, x) {
        let upto = members.partition_point(|&m| m <= cx);
        // gaps need m_+ inside the table, second gaps m_++
        let gaps: Vec<u64> = (0..upto.min(members.len().saturating_sub(1)))
            .map(|i| members[i + 1] - members[i])
            .collect();
        let max_second_gap = (0..upto.min(members.len().saturating_sub(2)))
            .map(|i| members[i + 2] - members[i + 1])
            .max()
            .unwrap_or(0);
        let mut sorted = gaps.clone();
        sorted.sort_unstable();
        if cx == x {
            histogram = vec![0u64; sorted.last().map_or(1, |&g| g as usize + 1)];
            for &g in &gaps {
                histogram[g as usize] += 1;
            }
        }
        checkpoints.push(GapCheckpoint {
            x: cx,
            gaps: gaps.len() as u64,
            mean_gap: gaps.iter().sum::<u64>() as f64 / gaps.len().max(1) as f64,
            median: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
            q99: quantile(&sorted, 0.99),
            max_gap: sorted.last().copied().unwrap_or(0),
            max_second_gap,
        });
    }
    Ok(GapReport {
        histogram,
        checkpoints,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentCheckpoint {
    pub x: u64,
    pub count: u64,
    pub mean_omega1: f64,
    pub second_moment_omega1: f64,
    /// `(1/2) log log x`.
    pub normal_order: f64,
    pub landau_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub checkpoints: Vec<MomentCheckpoint>,
}

/// First and second moments of `omega1` over `S(x)` at dyadic checkpoints.
pub fn moments_omega1(table: &SumsOfTwoSquaresTable) -> Result<MomentReport> {
    require(table, table.limit(), 10_000)?;
    let mut checkpoints = Vec::new();
    let (mut count, mut s1, mut s2) = (0u64, 0u64, 0u64);
    let mut prev = 0u64;
    let mut xs = dyadic_checkpoints(1 << 14, table.limit());
    let mut p = 10_000u64;
    while p <= table.limit() {
        xs.push(p);
        p *= 10;
    }
    xs.sort_unstable();
    xs.dedup();
    for x in xs {
        for n in table.members(prev + 1, x) {
            let w = table.omega1_at(n) as u64;
            count += 1;
            s1 += w;
            s2 += w * w;
        }
        prev = x;
        checkpoints.push(MomentCheckpoint {
            x,
            count,
            mean_omega1: s1 as f64 / count as f64,
            second_moment_omega1: s2 as f64 / count as f64,
            normal_order: 0.5 * (x as f64).ln().ln(),
            landau_ratio: landau_ratio(count, x),
        });
    }
    Ok(MomentReport { checkpoints })
}

/// `(1/x) sum_{n in S(x)} |w_k(n)|^2`.
pub fn wk_l2(table: &SumsOfTwoSquaresTable, k: i64, x: u64) -> Result<f64> {
    require(table, x, 1)?;
    if k % 4 != 0 {
        return Ok(0.0);
    }
    let chunks: Vec<f64> = (0..=x / 4096)
        .into_par_iter()
        .map(|c| {
            let (a, b) = ((c * 4096).max(1), ((c + 1) * 4096 - 1).min(x));
            table
                .members(a, b)
                .map(|n| {
                    let w = 4.0 * table.wk_quarter(n, k);
                    w * w
                })
                .sum::<f64>()
        })
        .collect();
    Ok(chunks.iter().sum::<f64>() / x as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WkTailRow {
    pub threshold: f64,
    /// Fraction of `n in S(x)` with `|w_k(n)| > T`.
    pub fraction: f64,
    /// Chebyshev bound `wk_l2 x / (T^2 |S(x)|)`.
    pub chebyshev_bound: f64,
}

/// Tail fractions of `|w_k|` against the Chebyshev bound from `wk_l2`.
pub fn wk_tail_report(
    table: &SumsOfTwoSquaresTable,
    k: i64,
    x: u64,
    thresholds: &[f64],
) -> Result<Vec<WkTailRow>> {
    let l2 = wk_l2(table, k, x)?;
    let values: Vec<f64> = table
        .members(1, x)
        .map(|n| (4.0 * table.wk_quarter(n, k)).abs())
        .collect();
    let count = values.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| WkTailRow {
            threshold: t,
            fraction: values.iter().filter(|&&v| v > t).count() as f64 / count,
            chebyshev_bound: l2 * x as f64 / (t * t * count),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaReport {
    pub k: i64,
    pub x: u64,
    pub primes: u64,
    /// Mean of `2 cos(k theta_p)` over split primes `p <= x`.
    pub mean: f64,
    /// Mean of `(2 cos(k theta_p))^2`.
    pub mean_square: f64,
}

/// Angular statistics of the split primes up to `x`.
pub fn theta_equidist(table: &SumsOfTwoSquaresTable, k: i64, x: u64) -> Result<ThetaReport> {
    if k == 0 || k % 4 != 0 {
        return Err(Error::Domain(format!(
            "k = {k} must be a non-zero multiple of 4"
        )));
    }
    require(table, x, 5)?;
    let (mut count, mut s1, mut s2) = (0u64, 0.0, 0.0);
    for p in (5..=x).step_by(4) {
        if let Ok(theta) = table.angle(p) {
            let v = 2.0 * (k as f64 * theta).cos();
            count += 1;
            s1 += v;
            s2 += v * v;
        }
    }
    Ok(ThetaReport {
        k,
        x,
        primes: count,
        mean: s1 / count as f64,
        mean_square: s2 / count as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_pair_counts() {
        let t = SumsOfTwoSquaresTable::build(200).unwrap();
        let r = pair_correlation(&t, 20, 10).unwrap();
        assert_eq!(r.counts[0], 6);
        assert!(r.recount_agrees);
        assert!((r.c_values[2] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.c_values[3], 1.0);
        assert!((singular_constant(&t, 21).unwrap() - 32.0 / 21.0).abs() < 1e-15);
        assert!(pair_correlation(&t, 195, 10).is_err());
    }

    #[test]
    fn landau_small() {
        let t = SumsOfTwoSquaresTable::build(5000).unwrap();
        let rep = landau_report(&t).unwrap();
        assert_eq!(rep.checkpoints[0].x, 1000);
        assert_eq!(t.members(1, 100).count(), 43);
    }

    #[test]
    fn gaps_small() {
        let t = SumsOfTwoSquaresTable::build(4096).unwrap();
        let nb = t.neighbors(20).unwrap();
        assert_eq!(nb.m_plus, Some(25));
        let rep = gap_stats(&t, 2048).unwrap();
        let last = rep.checkpoints.last().unwrap();
        assert!(rep.histogram[0] == 0);
        assert_eq!(rep.histogram.iter().sum::<u64>(), last.gaps);
    }

    #[test]
    fn wk_l2_special_cases() {
        let t = SumsOfTwoSquaresTable::build(20_000).unwrap();
        assert_eq!(wk_l2(&t, 2, 20_000).unwrap(), 0.0);
        let a = wk_l2(&t, 0, 10_000).unwrap();
        let b = wk_l2(&t, 0, 20_000).unwrap();
        assert!(b > a);
        assert!(theta_equidist(&t, 2, 1000).is_err());
    }
}
