//! Numerical laboratory for mappings with integrable dilatation.
//!
//! * [`tensorgrid`]: uniform grids, finite differences, quadrature, cutoffs.
//! * [`mapping`]: catalog of explicit mappings and their differential analysis.
//! * [`bump`]: the radial n-superharmonic bump family, its construction and certification.
//! * [`identities`]: weak-form identity checks and the Caccioppoli and log-log energy estimates.
//! * [`singular`]: zero sets, box-counting dimension and Sobolev norms of `log|F|`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bump;
pub mod error;
pub mod exact;
pub mod identities;
pub mod mapping;
pub mod singular;
pub mod tensorgrid;

pub use error::{Error, Result};

/// Radius `e^{-e}` of the target ball on which the bump functions live.
pub fn target_radius() -> f64 {
    (-std::f64::consts::E).exp()
}
