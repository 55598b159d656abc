use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::SumsOfTwoSquaresTable;
use crate::error::{Error, Result};

pub const PROPERTY_NAMES: [&str; 9] = [
    "multiplicity",
    "cancellation",
    "near-neighbors",
    "near-second-neighbors",
    "far-neighbors",
    "close-neighbor-count",
    "w-band-separation",
    "w-large-separation",
    "hg-sum",
];

/// Smallest m the filter considers; smaller elements are counted as removed.
const MIN_M: u64 = 16;
/// Exact `H_G` contributions below this distance, block upper bounds above.
const EXACT_RADIUS: u64 = 1024;
const BLOCKS_PER_OCTAVE: u64 = 32;

/// Desk-scale parameters of the nine properties. Each `eps` replaces an
/// `o(1)` exponent; `slack` replaces the implied constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropertyProfile {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eps4: f64,
    pub eps5: f64,
    pub eps6: f64,
    pub eps7: f64,
    pub eps8: f64,
    pub eps9: f64,
    pub slack: f64,
    pub k: i64,
}

impl Default for PropertyProfile {
    fn default() -> Self {
        PropertyProfile {
            eps1: 0.05,
            eps2: 0.05,
            eps3: 0.05,
            eps4: 0.05,
            eps5: 0.05,
            eps6: 0.05,
            eps7: 0.05,
            eps8: 0.05,
            eps9: 0.05,
            slack: 2.0,
            k: 4,
        }
    }
}

impl PropertyProfile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let p: PropertyProfile =
            toml::from_str(text).map_err(|e| Error::Config(format!("profile: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn eps(&self) -> [f64; 9] {
        [
            self.eps1, self.eps2, self.eps3, self.eps4, self.eps5, self.eps6, self.eps7, self.eps8,
            self.eps9,
        ]
    }

    /// Every `eps` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        PropertyProfile {
            eps1: self.eps1 * factor,
            eps2: self.eps2 * factor,
            eps3: self.eps3 * factor,
            eps4: self.eps4 * factor,
            eps5: self.eps5 * factor,
            eps6: self.eps6 * factor,
            eps7: self.eps7 * factor,
            eps8: self.eps8 * factor,
            eps9: self.eps9 * factor,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.eps().into_iter().enumerate() {
            if !(e > 0.0 && e <= 0.2) {
                return Err(Error::Config(format!(
                    "eps{} = {e} must lie in (0, 0.2]",
                    i + 1
                )));
            }
        }
        if !(self.slack >= 1.0 && self.slack.is_finite()) {
            return Err(Error::Config(format!(
                "slack = {} must be finite and at least 1",
                self.slack
            )));
        }
        if self.k == 0 || self.k % 4 != 0 {
            return Err(Error::Config(format!(
                "k = {} must be a non-zero multiple of 4",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterReport {
    pub x: u64,
    pub profile: PropertyProfile,
    pub survivors: Vec<u64>,
    /// Elements of `S(x)` below the smallest filtered m.
    pub below_min: u64,
    /// Removals attributed to the first failing property.
    pub removed_per_property: [u64; 9],
    /// `|S_1(x)| / |S(x)|`.
    pub density: f64,
}

struct Context<'a> {
    table: &'a SumsOfTwoSquaresTable,
    profile: &'a PropertyProfile,
    members: Vec<u64>,
    /// `rank[n] = |S ∩ [1, n]|`.
    rank: Vec<u32>,
    /// `|w_k(s_i)| / 4` by member index.
    wabs: Vec<f64>,
    sparse: Vec<Vec<f64>>,
    wmax: f64,
}

impl Context<'_> {
    fn count(&self, lo: u64, hi: u64) -> u64 {
        let hi = hi.min(self.table.limit());
        if lo > hi {
            return 0;
        }
        (self.rank[hi as usize] - self.rank[lo.max(1) as usize - 1]) as u64
    }

    fn range_max(&self, lo: usize, hi: usize) -> f64 {
        if lo > hi {
            return 0.0;
        }
        let level = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        self.sparse[level][lo].max(self.sparse[level][hi + 1 - (1 << level)])
    }

    /// Whether some `s_j` with `0 < |j - i| <= reach` has `|w_k| / 4 >= w`.
    fn w_near(&self, i: usize, reach: usize, w: f64) -> bool {
        if reach == 0 {
            return false;
        }
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(self.members.len() - 1);
        (i > 0 && self.range_max(lo, i - 1) >= w) || self.range_max(i + 1, hi) >= w
    }

    /// Upper bounds for `H_G(m)` at `G = 2^j`, indexed by `j`.
    fn hg_octaves(&self, m: u64) -> Vec<f64> {
        let limit = self.table.limit();
        let far = m.max(limit - m);
        let octaves = (64 - far.leading_zeros()) as usize + 1;
        let mut bins = vec![0.0f64; octaves];
        for n in self.table.members(
            m.saturating_sub(EXACT_RADIUS - 1).max(1),
            m + EXACT_RADIUS - 1,
        ) {
            if n != m {
                let d = m.abs_diff(n);
                bins[63 - d.leading_zeros() as usize] += 1.0 / (d * d) as f64;
            }
        }
        let mut j = EXACT_RADIUS.trailing_zeros() as usize;
        while (1u64 << j) <= far {
            let (a, step) = (1u64 << j, (1u64 << j) / BLOCKS_PER_OCTAVE);
            for b in 0..BLOCKS_PER_OCTAVE {
                let (da, db) = (a + b * step, a + (b + 1) * step - 1);
                let mut c = self.count(m + da, m + db);
                if m > da {
                    c += self.count(m.saturating_sub(db), m - da);
                }
                bins[j] += c as f64 / (da * da) as f64;
            }
            j += 1;
        }
        let tail = if m < limit {
            1.0 / (limit - m) as f64
        } else {
            f64::INFINITY
        };
        let mut acc = tail;
        let mut out = vec![0.0; octaves];
        for j in (0..octaves).rev() {
            acc += bins[j];
            out[j] = acc;
        }
        out
    }

    /// Index of the first failing property (0-based), or `None`.
    fn first_failure(&self, i: usize) -> Option<usize> {
        let p = self.profile;
        let c = p.slack;
        let s = &self.members;
        let m = s[i];
        let l = (m as f64).ln();
        let ll = l.ln();
        let (mm, mmm) = (s[i - 1], s[i - 2]);
        let (mp, mpp) = (s[i + 1], s[i + 2]);
        let a = std::f64::consts::LN_2 / 2.0;

        let (lo, hi) = (l.powf(a - p.eps1) / c, c * l.powf(a + p.eps1));
        let band = |n: u64| {
            let r = self.table.r2_at(n) as f64 / 4.0;
            r >= lo && r <= hi
        };
        if !(band(m) && band(mm)) {
            return Some(0);
        }
        let wb = c * l.powf(0.25 + p.eps2);
        if self.wabs[i] > wb || self.wabs[i - 1] > wb {
            return Some(1);
        }
        let near = l.powf(0.5 - p.eps3) / c;
        if ((mp - m) as f64) < near || ((m - mm) as f64) < near {
            return Some(2);
        }
        let near2 = l.powf(0.5 - p.eps4) / c;
        if ((mpp - mp) as f64) < near2 || ((mm - mmm) as f64) < near2 {
            return Some(3);
        }
        let far = c * l.powf(0.5 + p.eps5);
        if (mp - m) as f64 > far || (m - mm) as f64 > far || (mm - mmm) as f64 > far {
            return Some(4);
        }
        let mut t = 4u64;
        while t <= m {
            let tf = t as f64;
            let bound = c * tf * tf.ln().powi(2) / l.powf(0.5 - p.eps6);
            if self.count(m - t, m + t) as f64 > bound {
                return Some(5);
            }
            t *= 2;
        }
        let mut w = l.powf(0.25) * ll * ll;
        while w <= l * l {
            let r = w * w / (c * l.powf(0.5 + p.eps7) * ll * w.ln().powi(2));
            if self.w_near(i, reach(r), w) {
                return Some(6);
            }
            w *= 2.0;
        }
        let mut w = l * l;
        while w <= self.wmax {
            let r = w.powf(1.5) / (c * w.ln() * l.powf(p.eps8));
            if self.w_near(i, reach(r), w) {
                return Some(7);
            }
            w *= 2.0;
        }
        let hg = self.hg_octaves(m);
        let gmax = (m as f64).powf(0.9);
        let mut j = 2usize;
        while j < hg.len() && (1u64 << j) as f64 <= gmax {
            let g = (1u64 << j) as f64;
            if hg[j] > c * g.ln().powi(2) / (g * l.powf(0.5 - p.eps9)) {
                return Some(8);
            }
            j += 1;
        }
        None
    }
}

/// Largest index distance at which fewer than `r` elements lie strictly between.
fn reach(r: f64) -> usize {
    ((r + 1.0).ceil() - 1.0).max(0.0) as usize
}

/// Apply the nine predicates to every `m in S(x)`. The table must reach `2x`.
pub fn filter_s1(
    table: &SumsOfTwoSquaresTable,
    profile: &PropertyProfile,
    x: u64,
) -> Result<FilterReport> {
    profile.validate()?;
    if x < MIN_M || x.checked_mul(2).is_none_or(|e| e > table.limit()) {
        return Err(Error::Range {
            what: "x",
            value: x as i128,
            lo: MIN_M,
            hi: table.limit() / 2,
        });
    }
    let members: Vec<u64> = table.members(1, table.limit()).collect();
    let mut rank = vec![0u32; table.limit() as usize + 1];
    let mut acc = 0u32;
    for (n, slot) in rank.iter_mut().enumerate().skip(1) {
        if table.contains(n as u64) {
            acc += 1;
        }
        *slot = acc;
    }
    let wabs: Vec<f64> = members
        .par_iter()
        .map(|&n| table.wk_quarter(n, profile.k).abs())
        .collect();
    let wmax = wabs.iter().copied().fold(0.0, f64::max);
    let mut sparse = vec![wabs.clone()];
    let mut span = 1usize;
    while 2 * span <= wabs.len() {
        let prev = sparse.last().unwrap();
        let next: Vec<f64> = (0..=wabs.len() - 2 * span)
            .map(|i| prev[i].max(prev[i + span]))
            .collect();
        sparse.push(next);
        span *= 2;
    }
    let ctx = Context {
        table,
        profile,
        members,
        rank,
        wabs,
        sparse,
        wmax,
    };
    let total = ctx.rank[x as usize] as usize;
    let start = ctx.rank[MIN_M as usize - 1] as usize;
    let verdicts: Vec<Option<usize>> = (start..total)
        .into_par_iter()
        .map(|i| ctx.first_failure(i))
        .collect();
    let mut removed = [0u64; 9];
    let mut survivors = Vec::new();
    for (i, v) in (start..total).zip(verdicts) {
        match v {
            Some(p) => removed[p] += 1,
            None => survivors.push(ctx.members[i]),
        }
    }
    Ok(FilterReport {
        x,
        profile: profile.clone(),
        density: survivors.len() as f64 / total.max(1) as f64,
        survivors,
        below_min: start as u64,
        removed_per_property: removed,
    })
}
