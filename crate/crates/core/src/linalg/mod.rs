//! Dense symmetric matrices, the reference spectral decomposition, and the
//! projective geometry of unit vectors modulo sign.

mod io;
mod norm;
mod projective;
mod spectrum;

pub use io::{read_matrix, read_matrix_file, write_matrix, write_matrix_file};
pub use norm::{operator_norm, Difference, LinearOperator};
pub use projective::{canonicalize_sign, proj_distance, proj_distance_unit, ProjectivePoint};
pub use spectrum::{reconstruct, spectral_oracle, spectral_oracle_with, Spectrum, GAP_TOL};

use crate::error::{Error, Result};

/// Dense symmetric `n x n` matrix stored row-major in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds a matrix from a full row-major array, rejecting asymmetry.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::NotSymmetric { i, j });
                }
            }
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                k / n,
                k % n
            )));
        }
        Ok(SymmetricMatrix { n, data })
    }

    /// Builds a matrix from its upper triangle listed row by row.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        let expected = n * (n + 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: upper.len(),
            });
        }
        let mut data = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                data[i * n + j] = upper[k];
                data[j * n + i] = upper[k];
                k += 1;
            }
        }
        Self::from_dense(n, data)
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::from_dense(n, data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Full row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Upper triangle listed row by row.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            out.extend_from_slice(&self.data[i * n + i..(i + 1) * n]);
        }
        out
    }

    /// `y = M x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymmetricMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub(crate) fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `x / ‖x‖`, or an error for the zero vector.
pub fn normalized(x: &[f64]) -> Result<Vec<f64>> {
    let nx = norm(x);
    if nx == 0.0 || !nx.is_finite() {
        return Err(Error::InvalidInput(
            "cannot normalize a zero or non-finite vector".into(),
        ));
    }
    Ok(x.iter().map(|v| v / nx).collect())
}

/// `x - <u, x> u` for unit `u`.
pub fn project_orthogonal(x: &[f64], u: &[f64]) -> Vec<f64> {
    let c = dot(u, x);
    x.iter().zip(u).map(|(xi, ui)| xi - c * ui).collect()
}
