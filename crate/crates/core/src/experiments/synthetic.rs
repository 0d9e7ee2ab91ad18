use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, spectral_oracle, SymmetricMatrix};
use crate::rng::Rng;

/// Parameters of the spiked ensemble `λ1 uuᵀ + λ2 vvᵀ + W`.
///
/// `u` and `v` are orthonormalized random sign vectors, so the spikes are
/// spread evenly over the nodes. `W` is a symmetric Gaussian matrix scaled
/// so that `‖W‖₂ ≈ noise_ratio · λ2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub l2_target: f64,
    pub noise_ratio: f64,
    pub lambda1: f64,
}

impl SyntheticSpec {
    pub fn new(n: usize, l2_target: f64) -> Self {
        SyntheticSpec {
            n,
            l2_target,
            noise_ratio: 0.1,
            lambda1: 1.0,
        }
    }

    pub fn with_noise_ratio(mut self, r: f64) -> Self {
        self.noise_ratio = r;
        self
    }
}

/// A generated matrix with its construction parameters.
#[derive(Debug, Clone)]
pub struct SyntheticMatrix {
    pub m: SymmetricMatrix,
    pub lambda1: f64,
    pub lambda2: f64,
    pub noise_scale: f64,
    pub l2_measured: f64,
    pub attempts: usize,
}

const MAX_ATTEMPTS: usize = 20;
const L2_TOL: f64 = 0.02;

fn sign_vector(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Spiked matrix with default noise; see [`SyntheticSpec`].
pub fn make_synthetic(n: usize, l2_target: f64, rng: &mut Rng) -> Result<SymmetricMatrix> {
    Ok(make_synthetic_with(&SyntheticSpec::new(n, l2_target), rng)?.m)
}

/// Draws the spikes and noise once, then rescales `λ2` until the oracle gap
/// ratio is within 0.02 of the target.
pub fn make_synthetic_with(spec: &SyntheticSpec, rng: &mut Rng) -> Result<SyntheticMatrix> {
    let n = spec.n;
    if !(spec.l2_target > 0.0 && spec.l2_target < 1.0) {
        return Err(Error::InvalidInput(format!(
            "l2 target must lie in (0, 1), got {}",
            spec.l2_target
        )));
    }
    if n < 3 {
        return Err(Error::InvalidInput(
            "the spiked ensemble needs n >= 3".into(),
        ));
    }
    if !(spec.noise_ratio >= 0.0) {
        return Err(Error::InvalidInput(
            "noise ratio must be non-negative".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let u: Vec<f64> = sign_vector(n, rng).iter().map(|v| v * scale).collect();
    let v = loop {
        let raw = sign_vector(n, rng);
        let c = dot(&raw, &u);
        let w: Vec<f64> = raw.iter().zip(&u).map(|(r, ui)| r - c * ui).collect();
        let nw = crate::linalg::norm(&w);
        if nw > 1e-8 {
            break w.iter().map(|x| x / nw).collect::<Vec<f64>>();
        }
    };
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x: f64 = StandardNormal.sample(rng);
            g[i * n + j] = x;
            g[j * n + i] = x;
        }
    }
    let lambda1 = spec.lambda1;
    let mut lambda2 = spec.l2_target * lambda1;
    let noise_scale = spec.noise_ratio * lambda2 / 2.0 * scale;
    let mut measured = f64::NAN;
    for attempt in 1..=MAX_ATTEMPTS {
        let m = SymmetricMatrix::from_fn(n, |i, j| {
            lambda1 * u[i] * u[j] + lambda2 * v[i] * v[j] + noise_scale * g[i * n + j]
        })?;
        measured = spectral_oracle(&m)?.l2();
        if (measured - spec.l2_target).abs() <= L2_TOL {
            return Ok(SyntheticMatrix {
                m,
                lambda1,
                lambda2,
                noise_scale,
                l2_measured: measured,
                attempts: attempt,
            });
        }
        lambda2 *= spec.l2_target / measured;
    }
    Err(Error::TargetGapUnreachable {
        target: spec.l2_target,
        measured,
    })
}
