use super::{canonicalize_sign, SymmetricMatrix};
use crate::error::{Error, Result};

/// Default relative threshold for deciding that `λ1 > |λ2|`.
pub const GAP_TOL: f64 = 1e-12;

/// Full eigendecomposition ordered by decreasing magnitude.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    eigenvalues: Vec<f64>,
    // column k holds the k-th eigenvector
    eigenvectors: Vec<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k * self.n..(k + 1) * self.n]
    }

    /// Leading eigenvalue `λ`.
    pub fn lambda(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Leading eigenvector `u`, canonically signed.
    pub fn u(&self) -> &[f64] {
        self.eigenvector(0)
    }

    /// `|λ2| / λ1`.
    pub fn l2(&self) -> f64 {
        self.eigenvalues[1].abs() / self.eigenvalues[0]
    }

    /// `Σ |λi| / λ1`.
    pub fn gamma(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.abs()).sum::<f64>() / self.eigenvalues[0]
    }
}

/// Reference decomposition with the default gap threshold.
pub fn spectral_oracle(m: &SymmetricMatrix) -> Result<Spectrum> {
    spectral_oracle_with(m, GAP_TOL)
}

/// Reference decomposition; rejects spectra where `λ1 - |λ2| <= tol * λ1`.
pub fn spectral_oracle_with(m: &SymmetricMatrix, tol: f64) -> Result<Spectrum> {
    let n = m.n();
    let eig = nalgebra::SymmetricEigen::new(m.to_dmatrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        vb.abs().total_cmp(&va.abs()).then(vb.total_cmp(&va))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = Vec::with_capacity(n * n);
    for &k in &order {
        let mut col: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        canonicalize_sign(&mut col);
        eigenvectors.extend_from_slice(&col);
    }
    let (l1, l2_abs) = (eigenvalues[0], eigenvalues[1].abs());
    if l1 <= 0.0 && l1.abs() > l2_abs * (1.0 + tol) {
        return Err(Error::InvalidInput(
            "leading eigenvalue is negative; negate the matrix".into(),
        ));
    }
    if !(l1 > 0.0) || l1 - l2_abs <= tol * l1 {
        return Err(Error::DegenerateSpectrum {
            lambda1: l1,
            lambda2_abs: l2_abs,
        });
    }
    Ok(Spectrum {
        n,
        eigenvalues,
        eigenvectors,
    })
}

/// Rebuilds `U Λ Uᵀ` from a decomposition.
pub fn reconstruct(s: &Spectrum) -> SymmetricMatrix {
    let n = s.n;
    let mut data = vec![0.0; n * n];
    for k in 0..n {
        let lk = s.eigenvalues[k];
        let v = s.eigenvector(k);
        for i in 0..n {
            let a = lk * v[i];
            for j in 0..n {
                data[i * n + j] += a * v[j];
            }
        }
    }
    // symmetrize away rounding so the constructor accepts it
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
            data[i * n + j] = avg;
            data[j * n + i] = avg;
        }
    }
    SymmetricMatrix::from_dense(n, data).expect("reconstruction is symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diag_accepted_and_rejected() {
        let s = spectral_oracle(&SymmetricMatrix::diagonal(&[1.0, 3.0]).unwrap()).unwrap();
        assert_eq!(s.lambda(), 3.0);
        assert_eq!(s.u(), &[0.0, 1.0]);
        assert!((s.l2() - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.gamma() - 4.0 / 3.0).abs() < 1e-15);

        let e = spectral_oracle(&SymmetricMatrix::diagonal(&[2.0, 2.0]).unwrap());
        assert!(matches!(e, Err(Error::DegenerateSpectrum { .. })));
        let e = spectral_oracle(&SymmetricMatrix::diagonal(&[2.0, -2.0]).unwrap());
        assert!(matches!(e, Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn negative_leading_is_rejected() {
        let e = spectral_oracle(&SymmetricMatrix::diagonal(&[-3.0, 1.0]).unwrap());
        assert!(matches!(e, Err(Error::InvalidInput(_))));
    }
}
