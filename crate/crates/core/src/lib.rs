//! Numerical laboratory for random walks on `T^d × R` driven by `SL_d(Z)`
//! generators with a real cocycle `χ`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cartan;
pub mod empirical;
pub mod error;
pub mod fiber;
pub mod llt;
pub mod model;
pub mod orbits;
pub mod report;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
