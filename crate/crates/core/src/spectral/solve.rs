use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{CouplingConfig, CouplingMode};
use super::engine::{SecularEngine, SpectralPoint};
use crate::arith::SumsOfTwoSquaresTable;
use crate::error::{Error, Result};

const GUARD: f64 = 1e-9;
const MAX_ITER: u32 = 200;

/// One new eigenvalue in the gap `(m_minus, m)`; `m_minus = None` marks the
/// semi-infinite interval below 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenvalueRecord {
    pub m: u64,
    pub m_minus: Option<u64>,
    pub lambda_m: f64,
    /// `m - lambda_m`, carried separately for accuracy near `m`.
    pub gap_offset: f64,
    pub residual: f64,
    pub iterations: u32,
}

impl EigenvalueRecord {
    pub fn point(&self) -> SpectralPoint {
        SpectralPoint::below(self.m, self.gap_offset)
    }
}

/// Roots of all gaps up to a limit. In strong mode some gaps have no root
/// (the left pole lies outside the window); these are listed in `rootless`
/// by their right endpoint.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Spectrum {
    pub records: Vec<EigenvalueRecord>,
    pub rootless: Vec<u64>,
}

fn gap_label(left: Option<u64>) -> String {
    left.map_or_else(|| "-inf".to_string(), |l| l.to_string())
}

fn solver_error(left: Option<u64>, right: u64, reason: impl Into<String>) -> Error {
    Error::Solver {
        left: gap_label(left),
        right,
        reason: reason.into(),
    }
}

/// Solve `F(lambda) = rhs` on `(left, right)`.
///
/// Returns `Ok(None)` when the strong-mode function has no root on the gap.
/// The search runs in `t = right - lambda`, where `F(right - t) - rhs` is
/// strictly decreasing.
pub fn solve_interval(
    engine: &SecularEngine<'_>,
    cfg: &CouplingConfig,
    left: Option<u64>,
    right: u64,
    tol: f64,
) -> Result<Option<EigenvalueRecord>> {
    let table = engine.table();
    if !table.contains(right) || left.is_some_and(|l| l >= right || !table.contains(l)) {
        return Err(Error::Domain(format!(
            "({}, {right}) is not a gap between elements of S",
            gap_label(left)
        )));
    }
    if let Some(l) = left {
        if table.members(l + 1, right - 1).next().is_some() {
            return Err(Error::Domain(format!(
                "({l}, {right}) contains elements of S"
            )));
        }
    } else if right != 0 {
        return Err(Error::Domain("the unbounded interval ends at 0".into()));
    }
    let eval_tol = tol / 20.0;
    let h = |t: f64| -> Result<(f64, f64)> {
        let (ev, d) = engine.evaluate(cfg, SpectralPoint::below(right, t), eval_tol)?;
        Ok((ev.value - cfg.rhs, -d))
    };
    let strong = cfg.mode == CouplingMode::Strong;

    let (mut a, mut b) = match left {
        Some(l) => {
            let g = (right - l) as f64;
            (g * GUARD, g * (1.0 - GUARD))
        }
        None => (GUARD, 1.0),
    };
    let (ha, _) = h(a)?;
    if ha <= 0.0 {
        return Err(solver_error(
            left,
            right,
            "no sign change at the right pole guard",
        ));
    }
    let mut hb = h(b)?.0;
    if left.is_none() {
        let cap = (engine.table().limit() / 8) as f64;
        while hb >= 0.0 {
            a = b;
            b *= 2.0;
            if b > cap {
                if strong {
                    return Ok(None);
                }
                return Err(solver_error(
                    left,
                    right,
                    "lowest root lies beyond the table range",
                ));
            }
            hb = h(b)?.0;
        }
    } else if hb >= 0.0 {
        if strong {
            return Ok(None);
        }
        return Err(solver_error(
            left,
            right,
            "no sign change at the left pole guard",
        ));
    }

    let mut t = 0.5 * (a + b);
    let mut prev_step = b - a;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (val, dval) = h(t)?;
        let collapsed = iterations >= MAX_ITER || b - a <= 4.0 * f64::EPSILON * t.abs();
        if val.abs() <= tol / 8.0 || (collapsed && val.abs() <= tol) {
            return Ok(Some(EigenvalueRecord {
                m: right,
                m_minus: left,
                lambda_m: SpectralPoint::below(right, t).value(),
                gap_offset: t,
                residual: val.abs(),
                iterations,
            }));
        }
        if val > 0.0 {
            a = t;
        } else {
            b = t;
        }
        if collapsed {
            return Err(solver_error(
                left,
                right,
                format!("bracket collapsed with residual {:e}", val.abs()),
            ));
        }
        let newton = t - val / dval;
        let step = (newton - t).abs();
        t = if newton > a && newton < b && step < 0.5 * prev_step {
            prev_step = step;
            newton
        } else {
            prev_step = b - a;
            0.5 * (a + b)
        };
    }
}

/// Every gap with right endpoint `m <= limit`, plus the interval below 0.
pub fn spectrum(
    engine: &SecularEngine<'_>,
    cfg: &CouplingConfig,
    limit: u64,
    tol: f64,
) -> Result<Spectrum> {
    let table = engine.table();
    if limit > table.limit() {
        return Err(Error::Range {
            what: "limit",
            value: limit as i128,
            lo: 0,
            hi: table.limit(),
        });
    }
    let members: Vec<u64> = table.members(0, limit).collect();
    let mut gaps: Vec<(Option<u64>, u64)> = vec![(None, 0)];
    gaps.extend(members.windows(2).map(|w| (Some(w[0]), w[1])));
    let solved: Vec<Result<Option<EigenvalueRecord>>> = gaps
        .par_iter()
        .map(|&(l, r)| solve_interval(engine, cfg, l, r, tol))
        .collect();
    let mut out = Spectrum::default();
    for ((_, r), res) in gaps.iter().zip(solved) {
        match res? {
            Some(rec) => out.records.push(rec),
            None => out.rootless.push(*r),
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceSource {
    Solver,
    External,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterlacingSequence {
    pub values: Vec<f64>,
    pub source: SequenceSource,
}

impl InterlacingSequence {
    pub fn from_records(records: &[EigenvalueRecord]) -> Self {
        InterlacingSequence {
            values: records.iter().map(|r| r.lambda_m).collect(),
            source: SequenceSource::Solver,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterlacingReport {
    pub accepted: bool,
    pub gaps_spanned: usize,
    /// First offending gap `(m_minus, m)` and a description.
    pub violation: Option<(Option<u64>, u64, String)>,
}

/// Accept iff the values increase strictly and each gap of S between the
/// first and last value holds exactly one of them.
pub fn validate_interlacing(
    seq: &InterlacingSequence,
    table: &SumsOfTwoSquaresTable,
) -> InterlacingReport {
    let reject = |l: Option<u64>, r: u64, why: String, spanned| InterlacingReport {
        accepted: false,
        gaps_spanned: spanned,
        violation: Some((l, r, why)),
    };
    if seq.values.is_empty() {
        return reject(None, 0, "empty sequence".into(), 0);
    }
    let mut prev_gap: Option<(Option<u64>, u64)> = None;
    let mut prev_value = f64::NEG_INFINITY;
    let mut spanned = 0;
    for &v in &seq.values {
        if !v.is_finite() || v >= table.limit() as f64 {
            return reject(
                None,
                table.limit(),
                format!("value {v} lies outside the table"),
                spanned,
            );
        }
        let right = if v < 0.0 {
            0
        } else {
            match table.next_member(v.floor() as u64 + 1) {
                Some(r) => r,
                None => {
                    return reject(
                        None,
                        table.limit(),
                        format!("value {v} lies past the last gap"),
                        spanned,
                    )
                }
            }
        };
        let left = if right == 0 {
            None
        } else {
            table.prev_member(right - 1)
        };
        if left.is_some_and(|l| v <= l as f64) {
            return reject(
                left,
                right,
                format!("value {v} coincides with an element of S"),
                spanned,
            );
        }
        if v <= prev_value {
            return reject(
                left,
                right,
                format!("values not increasing at {v}"),
                spanned,
            );
        }
        if let Some((_, pr)) = prev_gap {
            if pr == right {
                return reject(
                    left,
                    right,
                    format!("two values in the gap ({}, {right})", gap_label(left)),
                    spanned,
                );
            }
            if left != Some(pr) {
                let skipped = table.next_member(pr + 1).unwrap_or(right);
                return reject(Some(pr), skipped, "gap has no value".into(), spanned);
            }
        }
        spanned += 1;
        prev_gap = Some((left, right));
        prev_value = v;
    }
    InterlacingReport {
        accepted: true,
        gaps_spanned: spanned,
        violation: None,
    }
}

/// Weak-coupling value at a strong-coupling root, against `-pi log lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenormalisationSample {
    pub m: u64,
    pub lambda: f64,
    pub weak_value: f64,
    pub ratio: f64,
}

/// For each strong root, `F_weak(lambda_m) / (-pi log lambda_m)`.
pub fn renormalisation_report(
    engine: &SecularEngine<'_>,
    roots: &[EigenvalueRecord],
    tol: f64,
) -> Result<Vec<RenormalisationSample>> {
    roots
        .par_iter()
        .filter(|r| r.lambda_m > 1.0)
        .map(|r| {
            let weak = engine.weak(r.point(), tol)?.value;
            Ok(RenormalisationSample {
                m: r.m,
                lambda: r.lambda_m,
                weak_value: weak,
                ratio: weak / (-PI * r.lambda_m.ln()),
            })
        })
        .collect()
}
