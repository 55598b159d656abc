//! Desk-scale statistics of S: counting, pair correlation, moments of
//! `omega1`, `w_k` averages, the nine-property filter and decay reports.

mod counting;
mod decay;
mod filter;
mod hg;

pub use counting::{
    gap_stats, landau_report, moments_omega1, pair_correlation, singular_constant, theta_equidist,
    wk_l2, wk_tail_report, GapCheckpoint, GapReport, LandauCheckpoint, LandauReport,
    MomentCheckpoint, MomentReport, PairCorrelationReport, ThetaReport, WkTailRow,
};
pub use decay::{
    decay_report, decay_sample, solve_gaps, DecayBlock, DecayPoint, DecayReport, DECAY_EXPONENT,
};
pub use filter::{filter_s1, FilterReport, PropertyProfile, PROPERTY_NAMES};
pub use hg::{hg_sum, HgValue};

/// Dyadic checkpoints `2^j` in `[lo, hi]`, with `hi` appended when it is
/// not itself a power of two.
pub fn dyadic_checkpoints(lo: u64, hi: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..63)
        .map(|j| 1u64 << j)
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    if out.last() != Some(&hi) && hi >= lo {
        out.push(hi);
    }
    out
}
