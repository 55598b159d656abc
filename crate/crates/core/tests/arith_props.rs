use std::sync::OnceLock;

use pointscatter::arith::{lattice_points, two_square_rep, wk_direct, SumsOfTwoSquaresTable};
use proptest::prelude::*;

fn table() -> &'static SumsOfTwoSquaresTable {
    static T: OnceLock<SumsOfTwoSquaresTable> = OnceLock::new();
    T.get_or_init(|| SumsOfTwoSquaresTable::build(200_000).unwrap())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn membership_matches_enumeration() {
    let t = table();
    let mut seen = vec![false; 10_001];
    for a in 0..=100u64 {
        for b in 0..=100u64 {
            if a * a + b * b <= 10_000 {
                seen[(a * a + b * b) as usize] = true;
            }
        }
    }
    for (n, &s) in seen.iter().enumerate() {
        assert_eq!(t.contains(n as u64), s, "n = {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn r2_counts_lattice_points(n in 0u64..200_000) {
        prop_assert_eq!(table().r2(n).unwrap() as usize, lattice_points(n).points.len());
    }

    #[test]
    fn quarter_r2_is_multiplicative(a in 1u64..400, b in 1u64..400) {
        prop_assume!(gcd(a, b) == 1);
        let t = table();
        prop_assert_eq!(t.r2_at(a * b) / 4 * 4, t.r2_at(a * b));
        prop_assert_eq!(t.r2_at(a * b) / 4, (t.r2_at(a) / 4) * (t.r2_at(b) / 4));
    }

    #[test]
    fn wk_matches_direct_sum(n in 1u64..200_000, j in -6i64..=6) {
        let k = 4 * j;
        let t = table();
        let fast = t.wk(n, k).unwrap().value;
        let slow = wk_direct(n, k).value;
        prop_assert!((fast - slow).abs() <= 1e-8 * (t.r2_at(n) as f64).max(1.0));
    }

    #[test]
    fn wk_vanishes_off_multiples_of_four(n in 1u64..200_000, k in -50i64..50) {
        prop_assume!(k % 4 != 0);
        prop_assert_eq!(table().wk(n, k).unwrap().value, 0.0);
    }

    #[test]
    fn wk_bounded_by_r2(n in 1u64..200_000, k in 1i64..20) {
        let t = table();
        prop_assert!(t.wk(n, 4 * k).unwrap().value.abs() <= t.r2_at(n) as f64 + 1e-9);
    }

    #[test]
    fn neighbors_are_adjacent_members(m in 1u64..199_000) {
        let t = table();
        prop_assume!(t.contains(m));
        let nb = t.neighbors(m).unwrap();
        let plus = nb.m_plus.unwrap();
        prop_assert!(plus > m && t.contains(plus));
        prop_assert!(((m + 1)..plus).all(|n| !t.contains(n)));
        let minus = nb.m_minus.unwrap();
        prop_assert!(minus < m && t.contains(minus));
        prop_assert!(((minus + 1)..m).all(|n| !t.contains(n)));
    }

    #[test]
    fn split_prime_representation(i in 0usize..2000) {
        let p = table().members(5, 200_000).filter(|&n| n % 4 == 1 && pointscatter::num::is_prime(n)).nth(i).unwrap();
        let rep = two_square_rep(p).unwrap();
        prop_assert_eq!(rep.x * rep.x + rep.y * rep.y, p);
        prop_assert!(rep.theta >= 0.0 && rep.theta < std::f64::consts::FRAC_PI_4);
    }
}
