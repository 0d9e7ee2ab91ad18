//! Reference implementations shared by the integration tests. Kept
//! independent of the library's numerics: plain loops, no nalgebra.

#![allow(dead_code)]

use gossip_pca::linalg::SymmetricMatrix;
use gossip_pca::rng::{gaussian_vector, SeedStream};

/// Dense row-major product `A x`.
pub fn dense_matvec(n: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// ascending.
pub fn jacobi_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Leading eigenvector by plain dense power iteration, run to a fixed point.
pub fn dense_power_method(m: &SymmetricMatrix, iters: usize, seed: u64) -> Vec<f64> {
    let n = m.n();
    let mut x = gaussian_vector(n, &mut SeedStream::new(seed).rng());
    for _ in 0..iters {
        let y = dense_matvec(n, m.as_slice(), &x);
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.iter().map(|v| v / ny).collect();
    }
    x
}

/// `sqrt(1 − ⟨x,y⟩²)` for unit vectors, evaluated as the residual
/// `‖x − ⟨x,y⟩y‖` so that tiny angles are not lost to cancellation.
pub fn sine_distance(x: &[f64], y: &[f64]) -> f64 {
    let c: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - c * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Random symmetric matrix with a planted dominant direction so that the
/// leading eigenvalue is positive and well separated.
pub fn planted_matrix(n: usize, spike: f64, seed: u64) -> SymmetricMatrix {
    let mut rng = SeedStream::new(seed).rng();
    let g = gaussian_vector(n * n, &mut rng);
    let w = gaussian_vector(n, &mut rng);
    let nw = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let w: Vec<f64> = w.iter().map(|v| v / nw).collect();
    SymmetricMatrix::from_fn(n, |i, j| {
        spike * w[i] * w[j] + 0.5 * (g[i * n + j] + g[j * n + i]) / (n as f64).sqrt()
    })
    .unwrap()
}

/// Random symmetric matrix with iid entries.
pub fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
    let g = gaussian_vector(n * n, &mut SeedStream::new(seed).rng());
    SymmetricMatrix::from_fn(n, |i, j| 0.5 * (g[i * n + j] + g[j * n + i])).unwrap()
}
