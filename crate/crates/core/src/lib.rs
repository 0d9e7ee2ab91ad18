//! Decentralized leading-eigenvector and eigenvalue estimation by iterating
//! independent random sparsifications of a symmetric matrix, with a
//! synchronous gossip-network simulator, communication accounting and
//! diagnostics for the induced random chain on projective space.

// Index loops mirror the per-node arithmetic; negated comparisons keep NaN
// on the failure branch.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod gossip;
pub mod linalg;
pub mod par;
pub mod rng;
pub mod sparsifier;
pub mod stats;

pub use error::{Error, Result};
