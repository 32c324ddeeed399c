//! Tensor-train numerics and ergodic exploration.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod distributions;
pub mod ergodic;
pub mod error;
pub mod fourier;
pub mod manifold;
pub mod sim;
pub mod stats;
pub mod tt;

pub use error::{Error, Result};
