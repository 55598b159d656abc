use std::sync::OnceLock;

use num_complex::Complex64;
use pointscatter::arith::SumsOfTwoSquaresTable;
use pointscatter::greens::{mixed_element, polynomial_element, pure_momentum_element, Observable};
use pointscatter::spectral::{solve_interval, CouplingConfig, SecularEngine, SpectralPoint};
use proptest::prelude::*;

fn table() -> &'static SumsOfTwoSquaresTable {
    static T: OnceLock<SumsOfTwoSquaresTable> = OnceLock::new();
    T.get_or_init(|| SumsOfTwoSquaresTable::build(1 << 20).unwrap())
}

fn root(m_idx: usize, phi: f64) -> SpectralPoint {
    let t = table();
    let e = SecularEngine::new(t).unwrap();
    let m = t.members(1, t.limit()).nth(m_idx).unwrap();
    let left = t.prev_member(m - 1).unwrap();
    solve_interval(
        &e,
        &CouplingConfig::weak(phi).unwrap(),
        Some(left),
        m,
        1e-10,
    )
    .unwrap()
    .unwrap()
    .point()
}

#[test]
fn normalisation_is_exact() {
    let e = SecularEngine::new(table()).unwrap();
    let p = root(40, 0.3);
    assert_eq!(
        pure_momentum_element(&e, p, 0, 1e-7).unwrap().value,
        Complex64::new(1.0, 0.0)
    );
    assert_eq!(
        mixed_element(p, (0, 0), 0, 1e-7).unwrap().value,
        Complex64::new(1.0, 0.0)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pure_elements_are_bounded(m_idx in 1usize..800, j in 1i64..6) {
        let e = SecularEngine::new(table()).unwrap();
        let el = pure_momentum_element(&e, root(m_idx, 0.0), 4 * j, 1e-7).unwrap();
        prop_assert!(el.value.norm() <= 1.0 + 1e-9);
        prop_assert_eq!(el.value.im, 0.0);
    }

    #[test]
    fn mixed_elements_are_bounded(m_idx in 1usize..300, a in -3i64..=3, b in -3i64..=3, j in 0i64..4) {
        prop_assume!((a, b) != (0, 0));
        let el = mixed_element(root(m_idx, 0.0), (a, b), 4 * j, 1e-7).unwrap();
        prop_assert!(el.value.norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn pure_and_mixed_agree(m_idx in 1usize..300, j in 1i64..3) {
        let e = SecularEngine::new(table()).unwrap();
        let p = root(m_idx, 0.0);
        let a = pure_momentum_element(&e, p, 4 * j, 1e-8).unwrap().value;
        let b = mixed_element(p, (0, 0), 4 * j, 1e-8).unwrap().value;
        prop_assert!((a - b).norm() <= 1e-6 * a.norm().max(1e-3));
    }

    #[test]
    fn even_classes_satisfy_conjugation(m_idx in 1usize..300, a in -2i64..=2, b in -2i64..=2, j in 0i64..3) {
        prop_assume!((a, b) != (0, 0));
        let p = root(m_idx, 0.0);
        let x = mixed_element(p, (a, b), 2 * j, 1e-8).unwrap().value;
        let y = mixed_element(p, (-a, -b), -2 * j, 1e-8).unwrap().value;
        prop_assert!((x - y.conj()).norm() <= 1e-6);
    }

    #[test]
    fn elements_are_linear(m_idx in 1usize..300, c1 in -2.0f64..2.0, c2 in -2.0f64..2.0) {
        let e = SecularEngine::new(table()).unwrap();
        let p = root(m_idx, 0.0);
        let mut obs = Observable::new();
        obs.add_term((0, 0), 4, Complex64::new(c1, 0.0));
        obs.add_term((1, 0), 0, Complex64::new(0.0, c2));
        let whole = polynomial_element(&obs, &e, p, 1e-8).unwrap();
        let parts = Complex64::new(c1, 0.0) * pure_momentum_element(&e, p, 4, 1e-8).unwrap().value
            + Complex64::new(0.0, c2) * mixed_element(p, (1, 0), 0, 1e-8).unwrap().value;
        prop_assert!((whole - parts).norm() <= 1e-12);
    }
}
