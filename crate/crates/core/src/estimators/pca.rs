use super::{EigvecEstimate, PcaConfig, RoundTrace, Trajectory};
use crate::error::{Error, Result};
use crate::gossip::{spmv_round, ComplexityLedger, NetworkState, Scale};
use crate::linalg::{norm, SymmetricMatrix};
use crate::rng::Rng;
use crate::sparsifier::{draw, SparsifyScheme};

/// Result of a gossip-PCA run.
#[derive(Debug, Clone)]
pub struct PcaRun {
    pub estimate: EigvecEstimate,
    pub trajectory: Trajectory,
    /// Running estimates at the configured checkpoint rounds.
    pub checkpoints: Vec<EigvecEstimate>,
}

/// Gossip PCA from a unit-norm start. The norm is checked to `1e-9`, or to
/// `4ε` when the start itself came out of a gossip-normalized iteration.
///
/// Every round multiplies by a fresh sparsification, normalizes with the
/// node's own norm estimate, and adds the iterate to a running sum after
/// aligning its sign with that sum.
pub fn gossip_pca(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    x0: &[f64],
    t: usize,
    cfg: &PcaConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<PcaRun> {
    if (norm(x0) - 1.0).abs() > 1e-9_f64.max(4.0 * cfg.reduction.epsilon()) {
        return Err(Error::InvalidInput(
            "initial vector must have unit norm".into(),
        ));
    }
    run_chain(m, scheme, x0, t, cfg, rng, ledger)
}

/// Gossip PCA from any nonzero start; log-magnitudes are relative to `x0`.
pub fn run_chain(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    x0: &[f64],
    t: usize,
    cfg: &PcaConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<PcaRun> {
    let n = m.n();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if t == 0 {
        return Err(Error::InvalidInput("at least one round is required".into()));
    }
    let nf = n as f64;
    let mut state = NetworkState::new(x0.to_vec());
    let mut sum = vec![0.0; n];
    let mut traj = Trajectory::default();
    let mut log_mag = 0.0;
    let mut checkpoints = Vec::new();

    for round in 1..=t {
        let s = draw(m, scheme, rng);
        let y = spmv_round(&state, &s, ledger)?;
        let yv = y.values();

        // Each node contributes y_i^2 and, after the first round, sum_i * y_i.
        let first = round == 1;
        let k = if first { 1 } else { 2 };
        let mut records = Vec::with_capacity(n * k);
        for i in 0..n {
            records.push(yv[i] * yv[i]);
            if !first {
                records.push(sum[i] * yv[i]);
            }
        }
        let scales: Vec<Scale> = if first {
            vec![Scale::Mean]
        } else {
            let my2 = yv.iter().map(|v| v * v).sum::<f64>() / nf;
            let ms2 = sum.iter().map(|v| v * v).sum::<f64>() / nf;
            vec![Scale::Mean, Scale::Fixed((my2 * ms2).sqrt())]
        };
        let avg = cfg.reduction.averages(records, k, &scales, rng, ledger)?;

        let mut next = vec![0.0; n];
        for i in 0..n {
            let norm_i = (nf * avg[i * k]).sqrt();
            if !(norm_i > 0.0 && norm_i.is_finite()) {
                return Err(Error::NonFiniteValue { node: i, round });
            }
            let xi = yv[i] / norm_i;
            let sign = if first || avg[i * k + 1] >= 0.0 {
                1.0
            } else {
                -1.0
            };
            sum[i] += sign * xi;
            next[i] = xi;
        }
        let norm0 = (nf * avg[0]).sqrt();
        log_mag += norm0.ln();
        traj.log_magnitudes.push(log_mag);
        if cfg.trace {
            traj.trace.push(RoundTrace {
                round,
                chi: ledger.chi(),
                max_node_value: yv.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
                norm_estimate: norm0,
            });
        }
        if cfg.keep_iterates {
            traj.normalized_iterates.push(next.clone());
        }
        if cfg.checkpoints.contains(&round) && round != t {
            checkpoints.push(readout(&sum, round, ledger)?);
        }
        state = NetworkState::with_round(next, round);
    }

    let estimate = readout(&sum, t, ledger)?;
    if cfg.checkpoints.contains(&t) {
        checkpoints.push(estimate.clone());
    }
    traj.last = state.into_values();
    Ok(PcaRun {
        estimate,
        trajectory: traj,
        checkpoints,
    })
}

fn readout(sum: &[f64], t: usize, ledger: &ComplexityLedger) -> Result<EigvecEstimate> {
    let s = norm(sum);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::NonFiniteValue { node: 0, round: t });
    }
    Ok(EigvecEstimate {
        u_hat: sum.iter().map(|v| v / s).collect(),
        t,
        chi: ledger.chi(),
        err_vs_oracle: None,
    })
}
