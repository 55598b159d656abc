use crate::dd::DoubleDouble;

/// `Z(s) = sum_{n>=1} r2(n) n^-s = 4 zeta(s) beta(s)` for `s = 2..=5`.
pub(crate) const LATTICE_ZETA: [DoubleDouble; 4] = [
    DoubleDouble::new(6.02681203969194, 1.0852807016830767e-16),
    DoubleDouble::new(4.6589136156038435, -9.863159266438065e-17),
    DoubleDouble::new(4.28143066080578, 4.2165192909193393e-16),
    DoubleDouble::new(4.1317748017458795, 3.4851788114725075e-16),
];

pub(crate) fn lattice_zeta(s: usize) -> DoubleDouble {
    LATTICE_ZETA[s - 2]
}
