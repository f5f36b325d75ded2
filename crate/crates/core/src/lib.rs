//! State-dependent Riccati equation (SDRE) feedback: dense matrix-equation
//! solvers, semilinear models, gain strategies, HJB residual analysis,
//! semilinear-form search and receding-horizon simulation.

// `!(a < b)` is used on purpose: NaN must fail these checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod mateq;
pub mod model;
pub mod sdc_search;
pub mod sdre;
pub mod sim;

pub use error::{Error, Result};
