use serde::Serialize;

use crate::arith::SumsOfTwoSquaresTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HgValue {
    pub m: u64,
    pub g: f64,
    /// In-table part of `sum 1/(m-n)^2` over `n in S`, `n != 0`, `|m-n| >= G`.
    pub value: f64,
    /// Bound on the part with `n > table.limit`.
    pub tail_bound: f64,
}

/// `H_G(m)` over the table range, summed in ascending `n`.
pub fn hg_sum(table: &SumsOfTwoSquaresTable, m: u64, g: f64) -> Result<HgValue> {
    if !(m >= 1 && m <= table.limit() && table.contains(m)) {
        return Err(Error::Domain(format!(
            "{m} is not an element of S within the table"
        )));
    }
    if !(g >= 1.0) {
        return Err(Error::Domain(format!("G = {g} must be at least 1")));
    }
    let mut value = 0.0;
    for n in table.members(1, table.limit()) {
        let d = m.abs_diff(n);
        if n != m && d as f64 >= g {
            let d = d as f64;
            value += 1.0 / (d * d);
        }
    }
    let tail_bound = if m < table.limit() {
        1.0 / (table.limit() - m) as f64
    } else {
        f64::INFINITY
    };
    Ok(HgValue {
        m,
        g,
        value,
        tail_bound,
    })
}
