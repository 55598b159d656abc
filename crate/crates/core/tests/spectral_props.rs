use std::sync::OnceLock;

use pointscatter::arith::SumsOfTwoSquaresTable;
use pointscatter::spectral::{
    c0, compute_c0, solve_interval, spectrum, validate_interlacing, CouplingConfig,
    InterlacingSequence, SecularEngine, SpectralPoint,
};
use proptest::prelude::*;

fn table() -> &'static SumsOfTwoSquaresTable {
    static T: OnceLock<SumsOfTwoSquaresTable> = OnceLock::new();
    T.get_or_init(|| SumsOfTwoSquaresTable::build(1 << 20).unwrap())
}

/// `F(lambda)` by direct summation to `n_max` with the smooth tail only.
fn direct_secular(lambda: f64, n_max: u64) -> f64 {
    let t = table();
    let mut s = 0.0;
    for n in 0..=n_max {
        let r = t.r2_at(n) as f64;
        if r > 0.0 {
            let nf = n as f64;
            s += r * (1.0 / (nf - lambda) - nf / (nf * nf + 1.0));
        }
    }
    let nf = n_max as f64;
    s - std::f64::consts::PI * ((-lambda / nf).ln_1p() - 0.5 * (1.0 / (nf * nf)).ln_1p())
}

#[test]
fn c0_is_stable() {
    let a = compute_c0(1e-13).unwrap();
    assert!((a - c0()).abs() < 1e-12);
    assert!((c0() - 4.7968257510574).abs() < 1e-11);
}

#[test]
fn engine_agrees_with_direct_sum() {
    let e = SecularEngine::new(table()).unwrap();
    for lam in [-3.7, 0.5, 12.25, 99.9, 1000.5] {
        let fast = e.weak(SpectralPoint::new(lam), 1e-10).unwrap().value;
        let slow = direct_secular(lam, 1 << 20);
        // the direct sum carries an O(sqrt(N)/N) lattice-fluctuation error
        assert!((fast - slow).abs() < 2e-2, "lambda {lam}: {fast} vs {slow}");
    }
}

#[test]
fn small_chain_interlaces() {
    let e = SecularEngine::new(table()).unwrap();
    let spec = spectrum(&e, &CouplingConfig::weak(0.0).unwrap(), 10, 1e-10).unwrap();
    let ms: Vec<u64> = spec.records.iter().map(|r| r.m).collect();
    assert_eq!(ms, [0, 1, 2, 4, 5, 8, 9, 10]);
    assert!(spec.records[0].lambda_m < 0.0);
    let rep = validate_interlacing(&InterlacingSequence::from_records(&spec.records), table());
    assert!(rep.accepted, "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn weak_roots_interlace(phi in -3.1f64..3.1, m_idx in 1usize..2000) {
        let t = table();
        let e = SecularEngine::new(t).unwrap();
        let cfg = CouplingConfig::weak(phi).unwrap();
        let m = t.members(1, t.limit()).nth(m_idx).unwrap();
        let left = t.prev_member(m - 1).unwrap();
        let r = solve_interval(&e, &cfg, Some(left), m, 1e-10).unwrap().unwrap();
        prop_assert!(r.lambda_m > left as f64 && r.lambda_m < m as f64);
        prop_assert!(r.residual <= 1e-10);
    }

    #[test]
    fn secular_increases_between_poles(m_idx in 1usize..3000, a in 0.01f64..0.49, b in 0.51f64..0.99) {
        let t = table();
        let e = SecularEngine::new(t).unwrap();
        let m = t.members(1, t.limit()).nth(m_idx).unwrap();
        let left = t.prev_member(m - 1).unwrap();
        let g = (m - left) as f64;
        let lo = e.weak(SpectralPoint::new(left as f64 + a * g), 1e-10).unwrap().value;
        let hi = e.weak(SpectralPoint::new(left as f64 + b * g), 1e-10).unwrap().value;
        prop_assert!(hi > lo);
    }

    #[test]
    fn doubling_truncation_stays_within_bound(lam in -50.0f64..20_000.0) {
        let e = SecularEngine::new(table()).unwrap();
        let p = SpectralPoint::new(lam);
        prop_assume!(e.weak(p, 1e-9).is_ok());
        let ev = e.weak(p, 1e-9).unwrap();
        prop_assume!(2 * ev.truncation_bound <= e.max_truncation());
        let (dbl, _) = e.weak_at_truncation(p, 2 * ev.truncation_bound).unwrap();
        prop_assert!((dbl.value - ev.value).abs() <= ev.error_bound + dbl.error_bound);
    }

    #[test]
    fn strong_roots_interlace_or_are_absent(phi in -3.0f64..3.0, delta in 0.1f64..0.9, m_idx in 1usize..2000) {
        let t = table();
        let e = SecularEngine::new(t).unwrap();
        let cfg = CouplingConfig::strong(phi, delta).unwrap();
        let m = t.members(1, t.limit()).nth(m_idx).unwrap();
        let left = t.prev_member(m - 1).unwrap();
        if let Some(r) = solve_interval(&e, &cfg, Some(left), m, 1e-10).unwrap() {
            prop_assert!(r.lambda_m > left as f64 && r.lambda_m < m as f64);
        }
    }
}
