//! Green's function of the point scatterer and matrix elements of toral
//! pseudodifferential operators against its normalised version.

mod element;
mod observable;
mod position;

pub use element::{
    mixed_element, polynomial_element, pure_momentum_element, wk_sum_constant, MatrixElement,
};
pub use observable::{apply_op, FourierMap, Observable};
pub use position::{eval_greens, GreensCoefficients, GreensValue};
