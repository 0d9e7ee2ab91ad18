use super::{run_chain, PcaConfig, Trajectory};
use crate::error::{Error, Result};
use crate::gossip::{ComplexityLedger, Reduction, Scale};
use crate::linalg::{dot, norm, SymmetricMatrix};
use crate::rng::{gaussian_vector, Rng};
use crate::sparsifier::SparsifyScheme;

/// Origin of the start vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum X0Kind {
    Gaussian,
    Given,
}

/// Leading-eigenvalue estimate `|⟨x0, x^(t)⟩|^(1/t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigvalEstimate {
    pub lambda_hat: f64,
    pub t: usize,
    pub x0_kind: X0Kind,
    /// `log |⟨x0, x^(t)⟩|`.
    pub log_inner: f64,
}

/// Runs `t` rounds from a standard Gaussian start and reads off `λ̂`.
pub fn estimate_eigenvalue(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    t: usize,
    cfg: &PcaConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<EigvalEstimate> {
    let g = gaussian_vector(m.n(), rng);
    let run_cfg = PcaConfig {
        keep_iterates: false,
        checkpoints: Vec::new(),
        ..cfg.clone()
    };
    let run = run_chain(m, scheme, &g, t, &run_cfg, rng, ledger)?;
    let mut est =
        eigenvalue_from_trajectory(&g, &run.trajectory, false, &cfg.reduction, rng, ledger)?;
    est.x0_kind = X0Kind::Gaussian;
    Ok(est)
}

/// `λ̂` from an existing trajectory started at `x0`, or at `x0/‖x0‖` when
/// `normalized_start` is set. Evaluated in log scale.
pub fn eigenvalue_from_trajectory(
    x0: &[f64],
    traj: &Trajectory,
    normalized_start: bool,
    reduction: &Reduction,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<EigvalEstimate> {
    let t = traj.t();
    if t == 0 || traj.last.len() != x0.len() {
        return Err(Error::InvalidInput(
            "trajectory does not match the start vector".into(),
        ));
    }
    let n = x0.len() as f64;
    let records: Vec<f64> = x0.iter().zip(&traj.last).map(|(a, b)| a * b).collect();
    let scale = ((dot(x0, x0) / n) * (dot(&traj.last, &traj.last) / n)).sqrt();
    let avg = reduction.averages(records, 1, &[Scale::Fixed(scale)], rng, ledger)?;
    let inner = n * avg[0];
    if !(inner.abs() >= 1e-300) {
        return Err(Error::ZeroInnerProduct);
    }
    let offset = if normalized_start { norm(x0).ln() } else { 0.0 };
    let log_inner = inner.abs().ln() + traj.log_magnitudes[t - 1] + offset;
    Ok(EigvalEstimate {
        lambda_hat: (log_inner / t as f64).exp(),
        t,
        x0_kind: X0Kind::Given,
        log_inner,
    })
}
