use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{dot, spectral_oracle, SymmetricMatrix};
use crate::rng::Rng;

/// Points in the unit square with their squared-distance matrix and its
/// double-centered form `B = −½ J D J`, `J = I − 11ᵀ/n`.
#[derive(Debug, Clone)]
pub struct MdsInstance {
    pub positions: Vec<[f64; 2]>,
    pub distances: SymmetricMatrix,
    pub centered: SymmetricMatrix,
}

impl MdsInstance {
    /// `n` points drawn uniformly from the unit square.
    pub fn random(n: usize, rng: &mut Rng) -> Result<Self> {
        let pos = (0..n)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        Self::from_positions(pos)
    }

    pub fn from_positions(positions: Vec<[f64; 2]>) -> Result<Self> {
        let n = positions.len();
        if n < 3 {
            return Err(Error::InvalidInput(
                "positioning needs at least 3 points".into(),
            ));
        }
        let distances = SymmetricMatrix::from_fn(n, |i, j| {
            let (a, b) = (positions[i], positions[j]);
            (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
        })?;
        let nf = n as f64;
        let row_mean: Vec<f64> = (0..n)
            .map(|i| distances.row(i).iter().sum::<f64>() / nf)
            .collect();
        let grand = row_mean.iter().sum::<f64>() / nf;
        let centered = SymmetricMatrix::from_fn(n, |i, j| {
            -0.5 * (distances.get(i, j) - row_mean[i] - row_mean[j] + grand)
        })?;
        Ok(MdsInstance {
            positions,
            distances,
            centered,
        })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Top-`r` eigenvectors of the centered matrix.
    pub fn true_basis(&self, r: usize) -> Result<Vec<Vec<f64>>> {
        let spec = spectral_oracle(&self.centered)?;
        Ok((0..r).map(|k| spec.eigenvector(k).to_vec()).collect())
    }
}

/// `(1/√r) min_Q ‖U − ÛQ‖_F` over orthogonal `r x r` matrices `Q`.
///
/// The minimizer is the polar factor `WVᵀ` of `ÛᵀU = WΣVᵀ`; the residual is
/// then formed explicitly so that aligned bases give exactly small values.
pub fn procrustes_distance(u: &[Vec<f64>], u_hat: &[Vec<f64>]) -> f64 {
    let r = u.len();
    assert_eq!(r, u_hat.len());
    let a = nalgebra::DMatrix::from_fn(r, r, |i, j| dot(&u_hat[i], &u[j]));
    let svd = a.svd(true, true);
    let q = svd.u.expect("left factor") * svd.v_t.expect("right factor");
    let n = u.first().map_or(0, |v| v.len());
    let mut sq = 0.0;
    for j in 0..r {
        for i in 0..n {
            let fit: f64 = (0..r).map(|k| u_hat[k][i] * q[(k, j)]).sum();
            sq += (u[j][i] - fit).powi(2);
        }
    }
    (sq / r as f64).sqrt()
}

/// `(1/√r) ‖U − ÛΣ‖_F` with only a per-column sign `Σ` fitted: the
/// unaligned error, for which each eigenvector must be matched on its own.
pub fn columnwise_distance(u: &[Vec<f64>], u_hat: &[Vec<f64>]) -> f64 {
    assert_eq!(u.len(), u_hat.len());
    let sq: f64 = u
        .iter()
        .zip(u_hat)
        .map(|(a, b)| {
            let minus: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
            let plus: f64 = a.iter().zip(b).map(|(x, y)| (x + y).powi(2)).sum();
            minus.min(plus)
        })
        .sum();
    (sq / u.len() as f64).sqrt()
}

/// `‖UUᵀ − ÛÛᵀ‖_F` for orthonormal `U`, `Û`.
pub fn subspace_distance(u: &[Vec<f64>], u_hat: &[Vec<f64>]) -> f64 {
    let r = u.len() as f64;
    let cross: f64 = u
        .iter()
        .flat_map(|a| u_hat.iter().map(move |b| dot(a, b).powi(2)))
        .sum();
    (2.0 * r - 2.0 * cross).max(0.0).sqrt()
}
