//! Exact analysis and sampling for two-spin systems on small graphs.
//!
//! The crate enumerates Gibbs distributions, runs Glauber, block, field
//! and projected-block dynamics, builds their exact transition matrices,
//! and checks spectral-independence, tree-uniqueness, potential-function
//! and path-coupling bounds numerically.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod gibbs;
pub mod graph;
pub mod model;
pub mod si;
pub mod tree;
pub mod uniqueness;
pub mod verify;

pub use error::{Error, Result};
pub use gibbs::GibbsTable;
pub use graph::Graph;
pub use model::{Configuration, DirectionVector, FieldVector, Pinning, TwoSpinSystem};
