use super::bounds::{warm_start_quality, warm_start_rounds};
use super::{power_method_block, PcaConfig};
use crate::error::{Error, Result};
use crate::gossip::ComplexityLedger;
use crate::linalg::{normalized, SymmetricMatrix};
use crate::rng::{gaussian_vector, Rng, SeedStream};
use crate::sparsifier::{calibrate_d, SampleMode, SparsifyScheme};

/// Output of the warm start.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub rounds: usize,
}

/// Uniformly random unit vector.
pub fn random_start(n: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        if let Ok(x) = normalized(&gaussian_vector(n, rng)) {
            return x;
        }
    }
}

/// Iterates one fixed sparsification `⌈3 log(n/θ)/(1−l2−θ)⌉` times from a
/// Gaussian start. `scheme` should be fine enough that
/// `‖S − M‖₂ <= θ²/(2(1−l2)) ‖M‖₂`; see [`warm_start_scheme`].
pub fn warm_start(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    theta: f64,
    l2: f64,
    cfg: &PcaConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<WarmStart> {
    if !(theta > 0.0 && theta < 1.0 - l2) {
        return Err(Error::InvalidGap {
            theta,
            limit: 1.0 - l2,
        });
    }
    let rounds = warm_start_rounds(m.n(), theta, l2);
    let x0 = random_start(m.n(), rng);
    let cfg = PcaConfig {
        checkpoints: Vec::new(),
        ..cfg.clone()
    };
    let run = power_method_block(m, scheme, &[x0], rounds, &cfg, rng, ledger)?;
    Ok(WarmStart {
        x: run.u_hat.into_iter().next().expect("one column"),
        rounds,
    })
}

/// Scheme whose estimated `θ` meets the warm-start quality `θ²/(2(1−l2))`.
pub fn warm_start_scheme(
    m: &SymmetricMatrix,
    theta: f64,
    l2: f64,
    mode: SampleMode,
    trials: usize,
    stream: SeedStream,
) -> Result<SparsifyScheme> {
    if !(theta > 0.0 && theta < 1.0 - l2) {
        return Err(Error::InvalidGap {
            theta,
            limit: 1.0 - l2,
        });
    }
    let d = calibrate_d(m, warm_start_quality(theta, l2), mode, trials, stream)?;
    Ok(SparsifyScheme::new(m.n(), d)?.with_mode(mode))
}
