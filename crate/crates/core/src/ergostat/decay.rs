use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::SumsOfTwoSquaresTable;
use crate::error::{Error, Result};
use crate::greens::pure_momentum_element;
use crate::spectral::{solve_interval, CouplingConfig, EigenvalueRecord, SecularEngine};

/// `1/4 - (log 2)/2`.
pub const DECAY_EXPONENT: f64 = 0.25 - std::f64::consts::LN_2 / 2.0;

const FULL_BELOW: u64 = 10_000;
const FIRST_BLOCK: u32 = 10;

const EXPONENT_NOTE: &str =
    "the asymptotic exponent 1/4 - (log 2)/2 = -0.0966 is not confirmable at this scale; \
medians and the comparison curve are descriptive only";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub m: u64,
    pub lambda: f64,
    pub value: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayBlock {
    pub j: u32,
    /// Block `(2^(j-1), 2^j]`.
    pub x: u64,
    pub count: u64,
    pub median: f64,
    pub survivor_count: u64,
    pub survivor_median: Option<f64>,
    /// `(log x)^(1/4 - (log 2)/2)`.
    pub comparison: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub k: i64,
    pub points: Vec<DecayPoint>,
    pub blocks: Vec<DecayBlock>,
    /// `max value / (log lambda)^(-0.09)` over survivors with `lambda > e`.
    pub survivor_constant: Option<f64>,
    pub note: &'static str,
}

/// Deterministic sample of `m in S` with `1 <= m <= x`: every element below
/// `10^4`, then `budget` elements above, split evenly over dyadic blocks and
/// drawn without replacement inside each block.
pub fn decay_sample(
    table: &SumsOfTwoSquaresTable,
    x: u64,
    budget: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    if x > table.limit() {
        return Err(Error::Range {
            what: "x",
            value: x as i128,
            lo: 1,
            hi: table.limit(),
        });
    }
    let mut out: Vec<u64> = table.members(1, x.min(FULL_BELOW)).collect();
    if x <= FULL_BELOW {
        return Ok(out);
    }
    let mut blocks = Vec::new();
    let mut lo = FULL_BELOW + 1;
    while lo <= x {
        let hi = lo.next_power_of_two().min(x);
        blocks.push((lo, hi));
        lo = hi + 1;
    }
    let per = budget.div_ceil(blocks.len());
    for (b, &(lo, hi)) in blocks.iter().enumerate() {
        let pool: Vec<u64> = table.members(lo, hi).collect();
        if pool.len() <= per {
            out.extend(pool);
            continue;
        }
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut picked: Vec<u64> = index::sample(&mut rng, pool.len(), per)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        picked.sort_unstable();
        out.extend(picked);
    }
    Ok(out)
}

/// Eigenvalues of the gaps ending at each `m` in `sample`. Rootless gaps are skipped.
pub fn solve_gaps(
    engine: &SecularEngine<'_>,
    cfg: &CouplingConfig,
    sample: &[u64],
    tol: f64,
) -> Result<Vec<EigenvalueRecord>> {
    let table = engine.table();
    let solved: Vec<Result<Option<EigenvalueRecord>>> = sample
        .par_iter()
        .map(|&m| {
            let left = if m == 0 {
                None
            } else {
                table.prev_member(m - 1)
            };
            solve_interval(engine, cfg, left, m, tol)
        })
        .collect();
    solved.into_iter().filter_map(|r| r.transpose()).collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `|<Op(e_{0,k}) g_m, g_m>|` over `records`, with dyadic-block medians.
/// `survivors` must be sorted.
pub fn decay_report(
    engine: &SecularEngine<'_>,
    records: &[EigenvalueRecord],
    k: i64,
    tol: f64,
    survivors: Option<&[u64]>,
) -> Result<DecayReport> {
    let points: Vec<DecayPoint> = records
        .par_iter()
        .filter(|r| r.m >= 1)
        .map(|r| {
            let e = pure_momentum_element(engine, r.point(), k, tol)?;
            Ok(DecayPoint {
                m: r.m,
                lambda: r.lambda_m,
                value: e.value.norm(),
                tail_bound: e.tail_bound,
            })
        })
        .collect::<Result<_>>()?;
    let is_survivor = |m: u64| survivors.is_some_and(|s| s.binary_search(&m).is_ok());
    let mut blocks = Vec::new();
    let top = points.iter().map(|p| p.m).max().unwrap_or(0);
    let mut j = FIRST_BLOCK;
    while j < 64 && (1u64 << (j - 1)) < top {
        let (lo, hi) = (1u64 << (j - 1), 1u64 << j);
        let mut all: Vec<f64> = points
            .iter()
            .filter(|p| p.m > lo && p.m <= hi)
            .map(|p| p.value)
            .collect();
        let mut surv: Vec<f64> = points
            .iter()
            .filter(|p| p.m > lo && p.m <= hi && is_survivor(p.m))
            .map(|p| p.value)
            .collect();
        if !all.is_empty() {
            blocks.push(DecayBlock {
                j,
                x: hi,
                count: all.len() as u64,
                median: median(&mut all),
                survivor_count: surv.len() as u64,
                survivor_median: (!surv.is_empty()).then(|| median(&mut surv)),
                comparison: (hi as f64).ln().powf(DECAY_EXPONENT),
            });
        }
        j += 1;
    }
    let survivor_constant = survivors.and_then(|_| {
        points
            .iter()
            .filter(|p| p.lambda > std::f64::consts::E && is_survivor(p.m))
            .map(|p| p.value / p.lambda.ln().powf(-0.09))
            .reduce(f64::max)
    });
    Ok(DecayReport {
        k,
        points,
        blocks,
        survivor_constant,
        note: EXPONENT_NOTE,
    })
}
