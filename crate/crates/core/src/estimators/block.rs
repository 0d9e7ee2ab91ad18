use super::PcaConfig;
use crate::error::{Error, Result};
use crate::gossip::{spmv_block, ComplexityLedger, Reduction, Scale};
use crate::linalg::{dot, norm, SymmetricMatrix};
use crate::rng::Rng;
use crate::sparsifier::{draw, SparseSample, SparsifyScheme};

/// Column-major block of node vectors.
type Block = Vec<Vec<f64>>;

/// Largest block size supported by the block estimators.
pub const MAX_BLOCK: usize = 5;

/// Snapshot of a block estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheckpoint {
    pub round: usize,
    pub chi: f64,
    pub basis: Vec<Vec<f64>>,
}

/// Result of a block run.
#[derive(Debug, Clone)]
pub struct BlockRun {
    /// Estimated orthonormal vectors, in order.
    pub u_hat: Vec<Vec<f64>>,
    pub t: usize,
    pub chi: f64,
    pub checkpoints: Vec<BlockCheckpoint>,
    /// Largest `‖X̃ᵀX̃ − I‖_F` observed after any round.
    pub max_orthonormality_defect: f64,
}

fn validate_block(x0: &[Vec<f64>], n: usize) -> Result<usize> {
    let r = x0.len();
    if r == 0 || r > MAX_BLOCK {
        return Err(Error::InvalidInput(format!(
            "block size must be in 1..={MAX_BLOCK}, got {r}"
        )));
    }
    for x in x0 {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
    }
    for a in 0..r {
        for b in 0..=a {
            let target = if a == b { 1.0 } else { 0.0 };
            if (dot(&x0[a], &x0[b]) - target).abs() > 1e-8 {
                return Err(Error::InvalidInput(
                    "initial block must be orthonormal".into(),
                ));
            }
        }
    }
    Ok(r)
}

#[inline]
fn tri(a: usize, b: usize) -> usize {
    // index of (a, b), b <= a, in row-major lower-triangular order
    a * (a + 1) / 2 + b
}

fn defect(x: &[Vec<f64>]) -> f64 {
    let r = x.len();
    let mut acc = 0.0;
    for a in 0..r {
        for b in 0..r {
            let target = if a == b { 1.0 } else { 0.0 };
            let e = dot(&x[a], &x[b]) - target;
            acc += e * e;
        }
    }
    acc.sqrt()
}

/// Orthonormalizes the block `y` with node-local Cholesky factors of the
/// gossiped Gram matrix `G = YᵀY/n`. When `sums` is given, also returns
/// per-node sign decisions aligning each new column with its running sum.
fn orthonormalize(
    y: &[Vec<f64>],
    sums: Option<&[Vec<f64>]>,
    reduction: &Reduction,
    round: usize,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<(Block, Block)> {
    let r = y.len();
    let n = y[0].len();
    let nf = n as f64;
    let gram_len = r * (r + 1) / 2;
    let k = if sums.is_some() {
        2 * gram_len
    } else {
        gram_len
    };

    let mut records = Vec::with_capacity(n * k);
    for i in 0..n {
        for a in 0..r {
            for b in 0..=a {
                records.push(y[a][i] * y[b][i]);
            }
        }
        if let Some(s) = sums {
            for a in 0..r {
                for b in 0..=a {
                    records.push(s[a][i] * y[b][i]);
                }
            }
        }
    }
    let mut scales = Vec::with_capacity(k);
    for a in 0..r {
        for b in 0..=a {
            scales.push(if a == b {
                Scale::Mean
            } else {
                Scale::Geometric(tri(a, a), tri(b, b))
            });
        }
    }
    if let Some(s) = sums {
        let ms: Vec<f64> = s.iter().map(|v| dot(v, v) / nf).collect();
        let my: Vec<f64> = y.iter().map(|v| dot(v, v) / nf).collect();
        for a in 0..r {
            for b in 0..=a {
                scales.push(Scale::Fixed((ms[a] * my[b]).sqrt()));
            }
        }
    }
    let avg = reduction.averages(records, k, &scales, rng, ledger)?;

    let mut x = vec![vec![0.0; n]; r];
    let mut signs = vec![vec![1.0; n]; r];
    let mut l = [[0.0f64; MAX_BLOCK]; MAX_BLOCK];
    let mut linv = [[0.0f64; MAX_BLOCK]; MAX_BLOCK];
    for i in 0..n {
        let rec = &avg[i * k..(i + 1) * k];
        // Cholesky G = L Lᵀ
        let mut normalized_det = 1.0;
        for a in 0..r {
            for b in 0..=a {
                let mut v = rec[tri(a, b)];
                for c in 0..b {
                    v -= l[a][c] * l[b][c];
                }
                if a == b {
                    let gaa = rec[tri(a, a)];
                    if !(v > 0.0) || !(gaa > 0.0) {
                        return Err(Error::RankDeficientGram { det: 0.0 });
                    }
                    normalized_det *= v / gaa;
                    l[a][a] = v.sqrt();
                } else {
                    l[a][b] = v / l[b][b];
                }
            }
        }
        if normalized_det < 1e-12 {
            return Err(Error::RankDeficientGram {
                det: normalized_det,
            });
        }
        // L^{-1} by forward substitution on the identity
        for a in 0..r {
            for b in 0..r {
                let mut v = if a == b { 1.0 } else { 0.0 };
                for c in 0..a {
                    v -= l[a][c] * linv[c][b];
                }
                linv[a][b] = v / l[a][a];
            }
        }
        let scale = 1.0 / nf.sqrt();
        for a in 0..r {
            let mut v = 0.0;
            for b in 0..=a {
                v += linv[a][b] * y[b][i];
            }
            let v = v * scale;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { node: i, round });
            }
            x[a][i] = v;
        }
        if sums.is_some() {
            let ip = &rec[gram_len..];
            for a in 0..r {
                let mut c = 0.0;
                for b in 0..=a {
                    c += linv[a][b] * ip[tri(a, b)];
                }
                signs[a][i] = if c >= 0.0 { 1.0 } else { -1.0 };
            }
        }
    }
    Ok((x, signs))
}

/// Power iteration with one fixed sparsification and Gram-based
/// orthonormalization each round. With `r = 1` this is the plain
/// normalized power method.
pub fn power_method_block(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    x0: &[Vec<f64>],
    t: usize,
    cfg: &PcaConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<BlockRun> {
    let s = draw(m, scheme, rng);
    power_method_with(&s, x0, t, cfg, rng, ledger)
}

/// Power iteration on a given sample.
pub fn power_method_with(
    s: &SparseSample,
    x0: &[Vec<f64>],
    t: usize,
    cfg: &PcaConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<BlockRun> {
    validate_block(x0, s.n())?;
    let mut x = x0.to_vec();
    let mut checkpoints = Vec::new();
    let mut worst = 0.0_f64;
    for round in 1..=t {
        let y = spmv_block(&x, s, round, ledger)?;
        x = orthonormalize(&y, None, &cfg.reduction, round, rng, ledger)?.0;
        worst = worst.max(defect(&x));
        if cfg.checkpoints.contains(&round) {
            checkpoints.push(BlockCheckpoint {
                round,
                chi: ledger.chi(),
                basis: x.clone(),
            });
        }
    }
    Ok(BlockRun {
        u_hat: x,
        t,
        chi: ledger.chi(),
        checkpoints,
        max_orthonormality_defect: worst,
    })
}

/// Gossip PCA for the top `r` eigenvectors.
///
/// Each round applies a fresh sparsification to the whole block and
/// re-orthonormalizes it. Column `a` is then sign-aligned with its own
/// running sum. The read-out orthonormalizes the sums in order, so the
/// estimate for vector `a` has the estimates `1..a-1` projected out.
pub fn gossip_pca_multi(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    x0: &[Vec<f64>],
    t: usize,
    cfg: &PcaConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<BlockRun> {
    let n = m.n();
    let r = validate_block(x0, n)?;
    if t == 0 {
        return Err(Error::InvalidInput("at least one round is required".into()));
    }
    let mut x = x0.to_vec();
    let mut sums = vec![vec![0.0; n]; r];
    let mut checkpoints = Vec::new();
    let mut worst = 0.0_f64;
    for round in 1..=t {
        let s = draw(m, scheme, rng);
        let y = spmv_block(&x, &s, round, ledger)?;
        let (xt, signs) = orthonormalize(
            &y,
            (round > 1).then_some(&sums[..]),
            &cfg.reduction,
            round,
            rng,
            ledger,
        )?;
        worst = worst.max(defect(&xt));
        for a in 0..r {
            for i in 0..n {
                sums[a][i] += signs[a][i] * xt[a][i];
            }
        }
        x = xt;
        if cfg.checkpoints.contains(&round) && round != t {
            checkpoints.push(BlockCheckpoint {
                round,
                chi: ledger.chi(),
                basis: deflated_readout(&sums, round)?,
            });
        }
    }
    let u_hat = deflated_readout(&sums, t)?;
    if cfg.checkpoints.contains(&t) {
        checkpoints.push(BlockCheckpoint {
            round: t,
            chi: ledger.chi(),
            basis: u_hat.clone(),
        });
    }
    Ok(BlockRun {
        u_hat,
        t,
        chi: ledger.chi(),
        checkpoints,
        max_orthonormality_defect: worst,
    })
}

/// Gram-Schmidt of the running sums, in order.
fn deflated_readout(sums: &[Vec<f64>], round: usize) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(sums.len());
    for s in sums {
        let mut v = s.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let nv = norm(&v);
        let ns = norm(s);
        if !(nv > 1e-6 * ns && nv.is_finite()) {
            if !nv.is_finite() {
                return Err(Error::NonFiniteValue { node: 0, round });
            }
            return Err(Error::RankDeficientGram {
                det: (nv / ns).powi(2),
            });
        }
        out.push(v.iter().map(|x| x / nv).collect());
    }
    Ok(out)
}
