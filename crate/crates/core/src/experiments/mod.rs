//! Experiment drivers behind the CLI.

pub mod config;
pub mod mds;
pub mod positioning;
pub mod synthetic;
pub mod tradeoff;
pub mod warmstart;

pub use config::{ErrorMetric, ExperimentConfig, ExperimentKind, MatrixSource};
pub use mds::{columnwise_distance, procrustes_distance, subspace_distance, MdsInstance};
pub use positioning::{run_positioning, PositioningReport, PositioningRow};
pub use synthetic::{make_synthetic, make_synthetic_with, SyntheticMatrix, SyntheticSpec};
pub use tradeoff::{run_tradeoff, Curve, Method, TradeoffReport, TradeoffRow};
pub use warmstart::{
    meeting_trial, run_warmstart_table, MeetingTrial, WarmstartRow, WarmstartTable,
};

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{read_matrix_file, SymmetricMatrix};
use crate::rng::{gaussian_vector, Rng, SeedStream};

/// Result record printed by the single-run subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub n: usize,
    pub d: f64,
    pub theta_hat: f64,
    pub t: usize,
    pub chi: f64,
    pub err: Option<f64>,
    pub lambda_hat: Option<f64>,
    pub seed: u64,
}

/// Spiked synthetic matrix from the configured size, gap and noise ratio.
pub fn synthetic_for(cfg: &ExperimentConfig, stream: SeedStream) -> Result<SymmetricMatrix> {
    let spec = SyntheticSpec::new(cfg.n, cfg.l2).with_noise_ratio(cfg.noise_ratio);
    Ok(make_synthetic_with(&spec, &mut stream.rng())?.m)
}

/// Target matrix named by `cfg.matrix_source`.
pub fn build_matrix(cfg: &ExperimentConfig, stream: SeedStream) -> Result<SymmetricMatrix> {
    match &cfg.matrix_source {
        MatrixSource::SyntheticSpiked => synthetic_for(cfg, stream),
        MatrixSource::Mds => Ok(MdsInstance::random(cfg.n, &mut stream.rng())?.centered),
        MatrixSource::File(path) => read_matrix_file(path),
    }
}

/// `r` orthonormal columns from Gaussian draws.
pub fn random_block(n: usize, r: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(r);
    while out.len() < r {
        let mut g = gaussian_vector(n, rng);
        for q in &out {
            let c = crate::linalg::dot(&g, q);
            g.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        if let Ok(v) = crate::linalg::normalized(&g) {
            out.push(v);
        }
    }
    out
}
