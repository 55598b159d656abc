//! Sums of two squares: the sieve-backed table of `r2`, `omega1` and the
//! exponential sums `w_k` over Gaussian integers of a given norm.

mod expsum;
mod gaussian;
mod table;

pub use expsum::{lattice_points, wk_direct, ExponentialSumValue, LatticePointSet};
pub use gaussian::{two_square_rep, GaussianRep};
pub use table::{build_table, NeighborSet, SumsOfTwoSquaresTable, MAX_LIMIT};
