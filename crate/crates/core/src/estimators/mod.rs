//! Eigenvector and eigenvalue estimators run on the simulated network.

mod block;
pub mod bounds;
mod eigenvalue;
mod pca;
mod warm;

pub use block::{
    gossip_pca_multi, power_method_block, power_method_with, BlockCheckpoint, BlockRun, MAX_BLOCK,
};
pub use eigenvalue::{eigenvalue_from_trajectory, estimate_eigenvalue, EigvalEstimate, X0Kind};
pub use pca::{gossip_pca, run_chain, PcaRun};
pub use warm::{random_start, warm_start, warm_start_scheme, WarmStart};

use serde::Serialize;

use crate::gossip::Reduction;
use crate::linalg::proj_distance_unit;

/// Options shared by the iterative estimators.
#[derive(Debug, Clone, Default)]
pub struct PcaConfig {
    /// How norms, signs and Gram matrices are reduced across nodes.
    pub reduction: Reduction,
    /// Keep every normalized iterate in the trajectory.
    pub keep_iterates: bool,
    /// Rounds at which to also report the running estimate.
    pub checkpoints: Vec<usize>,
    /// Record a per-round trace.
    pub trace: bool,
}

impl PcaConfig {
    pub fn exact() -> Self {
        PcaConfig {
            reduction: Reduction::Exact,
            ..Default::default()
        }
    }
}

/// One line of the round-by-round trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTrace {
    pub round: usize,
    pub chi: f64,
    pub max_node_value: f64,
    pub norm_estimate: f64,
}

/// Normalized iterates and cumulative log-magnitudes of `x^(t)`.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    /// `x̃^(1) ... x̃^(t)` when requested, otherwise empty.
    pub normalized_iterates: Vec<Vec<f64>>,
    /// Entry `l` is `log ‖x^(l+1)‖` relative to `x^(0)`.
    pub log_magnitudes: Vec<f64>,
    /// The last normalized iterate, always kept.
    pub last: Vec<f64>,
    pub trace: Vec<RoundTrace>,
}

impl Trajectory {
    pub fn t(&self) -> usize {
        self.log_magnitudes.len()
    }
}

/// Averaged eigenvector estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigvecEstimate {
    pub u_hat: Vec<f64>,
    pub t: usize,
    pub chi: f64,
    pub err_vs_oracle: Option<f64>,
}

impl EigvecEstimate {
    /// Fills in the projective distance to a known eigenvector.
    pub fn with_reference(mut self, u: &[f64]) -> Self {
        self.err_vs_oracle = Some(proj_distance_unit(&self.u_hat, u));
        self
    }
}

/// Row-wise trace as CSV with header `round,chi,max_node_value,norm_estimate`.
pub fn trace_csv(trace: &[RoundTrace]) -> String {
    let mut out = String::from("round,chi,max_node_value,norm_estimate\n");
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.round, r.chi, r.max_node_value, r.norm_estimate
        ));
    }
    out
}
