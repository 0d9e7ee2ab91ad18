use super::{dot, norm, SymmetricMatrix};
use crate::rng::SeedStream;

/// A symmetric linear map given by its action on vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SymmetricMatrix {
    fn dim(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

/// The operator `A - B`.
pub struct Difference<'a, A: ?Sized, B: ?Sized> {
    pub a: &'a A,
    pub b: &'a B,
}

impl<A: LinearOperator + ?Sized, B: LinearOperator + ?Sized> LinearOperator
    for Difference<'_, A, B>
{
    fn dim(&self) -> usize {
        self.a.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; y.len()];
        self.a.apply(x, y);
        self.b.apply(x, &mut tmp);
        for (yi, ti) in y.iter_mut().zip(&tmp) {
            *yi -= ti;
        }
    }
}

const START_SEED: u64 = 0x6f70_6e6f_726d;

/// Spectral norm `‖A‖₂` of a symmetric operator.
///
/// Lanczos with full reorthogonalization from a fixed seeded start vector;
/// stops when the extreme Ritz value has settled to about 1e-13 relative
/// or the Krylov space is exhausted.
pub fn operator_norm<A: LinearOperator + ?Sized>(a: &A) -> f64 {
    use rand::Rng as _;
    let n = a.dim();
    let mut rng = SeedStream::new(START_SEED).child(n as u64).rng();
    let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let nq = norm(&q);
    q.iter_mut().for_each(|v| *v /= nq);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut settled = 0;
    let mut est = 0.0;

    for k in 0..n {
        a.apply(&basis[k], &mut w);
        let alpha = dot(&basis[k], &w);
        for (wi, qi) in w.iter_mut().zip(&basis[k]) {
            *wi -= alpha * qi;
        }
        if k > 0 {
            let b = betas[k - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[k - 1]) {
                *wi -= b * qi;
            }
        }
        for _ in 0..2 {
            for qj in &basis {
                let c = dot(qj, &w);
                for (wi, qi) in w.iter_mut().zip(qj) {
                    *wi -= c * qi;
                }
            }
        }
        alphas.push(alpha);
        est = extreme_ritz(&alphas, &betas);
        let beta = norm(&w);
        let scale = est.max(alphas.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        if beta <= 1e-13 * scale || scale == 0.0 {
            break;
        }
        if (est - prev).abs() <= 1e-13 * est {
            settled += 1;
            if settled >= 2 {
                break;
            }
        } else {
            settled = 0;
        }
        prev = est;
        betas.push(beta);
        basis.push(w.iter().map(|v| v / beta).collect());
    }
    est
}

fn extreme_ritz(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let t = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    t.symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}
