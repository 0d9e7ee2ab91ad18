use super::dot;
use crate::error::{Error, Result};

/// Flips `v` so that its first nonzero coordinate is positive.
pub fn canonicalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Unit vector modulo sign, stored with a canonical representative.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    rep: Vec<f64>,
}

impl ProjectivePoint {
    /// Normalizes `v` and fixes its sign. Fails on the zero vector.
    pub fn new(v: &[f64]) -> Result<Self> {
        let mut rep = super::normalized(v)?;
        canonicalize_sign(&mut rep);
        Ok(ProjectivePoint { rep })
    }

    pub fn rep(&self) -> &[f64] {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.len()
    }

    pub fn distance(&self, other: &ProjectivePoint) -> Result<f64> {
        proj_distance(&self.rep, &other.rep)
    }
}

/// Projective distance between two unit vectors, checking dimensions.
pub fn proj_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(proj_distance_unit(x, y))
}

/// `sqrt(1 - <x,y>^2)` for unit `x`, `y`.
///
/// Evaluated as the length of the component of one vector orthogonal to the
/// other, which stays accurate when the points nearly coincide.
pub fn proj_distance_unit(x: &[f64], y: &[f64]) -> f64 {
    let c = dot(x, y);
    let mut a = 0.0;
    let mut b = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let p = xi - c * yi;
        let q = yi - c * xi;
        a += p * p;
        b += q * q;
    }
    (0.5 * (a + b)).sqrt().clamp(0.0, 1.0)
}
