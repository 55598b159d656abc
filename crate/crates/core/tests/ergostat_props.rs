use std::sync::OnceLock;

use pointscatter::arith::SumsOfTwoSquaresTable;
use pointscatter::ergostat::{
    filter_s1, gap_stats, hg_sum, moments_omega1, pair_correlation, singular_constant, wk_l2,
    wk_tail_report, PropertyProfile,
};
use proptest::prelude::*;

fn table() -> &'static SumsOfTwoSquaresTable {
    static T: OnceLock<SumsOfTwoSquaresTable> = OnceLock::new();
    T.get_or_init(|| SumsOfTwoSquaresTable::build(1 << 17).unwrap())
}

/// Brute-force `H_G(m)` from an independent membership list.
pub fn hg_oracle(limit: u64, m: u64, g: f64) -> f64 {
    let mut member = vec![false; limit as usize + 1];
    let mut a = 0u64;
    while a * a <= limit {
        let mut b = 0u64;
        while a * a + b * b <= limit {
            member[(a * a + b * b) as usize] = true;
            b += 1;
        }
        a += 1;
    }
    let mut s = 0.0;
    for (n, &is) in member.iter().enumerate().skip(1) {
        let n = n as u64;
        if is && n != m && m.abs_diff(n) as f64 >= g {
            let d = m.abs_diff(n) as f64;
            s += 1.0 / (d * d);
        }
    }
    s
}

#[test]
fn gap_examples() {
    let t = table();
    assert_eq!(t.neighbors(20).unwrap().m_plus, Some(25));
    assert_eq!(t.neighbors(25).unwrap().m_plus, Some(26));
    let rep = gap_stats(t, 1 << 16).unwrap();
    let last = rep.checkpoints.last().unwrap();
    let count = t.members(1, 1 << 16).count() as f64;
    assert!((last.mean_gap - (1u64 << 16) as f64 / count).abs() / last.mean_gap < 0.01);
    assert_eq!(rep.histogram[0], 0);
}

#[test]
fn omega_moments_dominate_squares() {
    for c in moments_omega1(table()).unwrap().checkpoints {
        assert!(c.second_moment_omega1 >= c.mean_omega1 * c.mean_omega1);
    }
}

#[test]
fn chebyshev_tail_consistency() {
    for row in wk_tail_report(table(), 4, 100_000, &[5.0, 10.0, 20.0]).unwrap() {
        assert!(row.fraction <= row.chebyshev_bound);
    }
    assert!(wk_l2(table(), 0, 100_000).unwrap() > wk_l2(table(), 0, 50_000).unwrap());
}

#[test]
fn nested_profiles_are_monotone() {
    let t = table();
    let p = PropertyProfile::default();
    let reports: Vec<_> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&f| filter_s1(t, &p.scaled(f), 1 << 16).unwrap())
        .collect();
    for w in reports.windows(2) {
        assert!(w[1]
            .survivors
            .iter()
            .all(|m| w[0].survivors.binary_search(m).is_ok()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn hg_matches_oracle(i in 0usize..2700, g in 1.0f64..5000.0) {
        let t = SumsOfTwoSquaresTable::build(10_000).unwrap();
        let m = t.members(1, 10_000).nth(i).unwrap();
        prop_assert_eq!(hg_sum(&t, m, g).unwrap().value, hg_oracle(10_000, m, g));
    }

    #[test]
    fn hg_decreases_in_g(i in 0usize..2700, g in 1.0f64..100.0, dg in 0.0f64..100.0) {
        let t = SumsOfTwoSquaresTable::build(10_000).unwrap();
        let m = t.members(1, 10_000).nth(i).unwrap();
        prop_assert!(hg_sum(&t, m, g + dg).unwrap().value <= hg_sum(&t, m, g).unwrap().value);
    }

    #[test]
    fn singular_constant_is_product(h in 1u64..10_000) {
        let mut expect = 1.0;
        let mut n = h;
        let mut p = 2;
        while n > 1 {
            if n % p == 0 {
                if p % 4 == 3 {
                    expect *= 1.0 + 1.0 / p as f64;
                }
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        prop_assert!((singular_constant(table(), h).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn pair_counts_recount(x in 100u64..20_000, hmax in 1u64..40) {
        let r = pair_correlation(table(), x, hmax).unwrap();
        prop_assert!(r.recount_agrees);
        let t = table();
        let direct = (1..=x).filter(|&n| t.contains(n) && t.contains(n + hmax)).count() as u64;
        prop_assert_eq!(r.counts[hmax as usize - 1], direct);
    }

    #[test]
    fn filter_survivors_nest(scale in 0.1f64..1.0) {
        let t = SumsOfTwoSquaresTable::build(8192).unwrap();
        let p = PropertyProfile::default().scaled(scale);
        let a = filter_s1(&t, &p, 4096).unwrap();
        let b = filter_s1(&t, &p.scaled(0.5), 4096).unwrap();
        prop_assert!(a.survivors.iter().all(|&m| t.contains(m)));
        prop_assert!(b.survivors.iter().all(|m| a.survivors.binary_search(m).is_ok()));
        prop_assert!((0.0..=1.0).contains(&a.density));
    }
}
