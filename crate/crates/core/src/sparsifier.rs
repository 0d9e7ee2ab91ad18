//! Random sparsifications of a symmetric matrix and empirical estimates of
//! their quality.
//!
//! Each kept entry is rescaled by `n/d`, so every sample is an unbiased
//! estimate of `M`. Samples are stored in CSR form with sorted columns.

use std::io::{BufRead, Write};

use rand::Rng as _;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, Difference, LinearOperator, SymmetricMatrix};
use crate::rng::{Rng, SeedStream};

/// How entries are selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleMode {
    /// Each unordered pair `{i, j}` and each diagonal entry is kept
    /// independently; symmetry and unbiasedness are exact.
    #[default]
    SymmetricPair,
    /// Each ordered entry is kept independently, then `(S + Sᵀ)/2`.
    IidEntry,
}

impl std::str::FromStr for SampleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric_pair" => Ok(SampleMode::SymmetricPair),
            "iid_entry" => Ok(SampleMode::IidEntry),
            _ => Err(Error::InvalidInput(format!("unknown sampling mode {s:?}"))),
        }
    }
}

/// Parameters of the sparsification law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifyScheme {
    n: usize,
    d: f64,
    rescale: f64,
    pub mode: SampleMode,
    /// Half-width of the uniform perturbation added to the diagonal.
    pub jitter: f64,
}

impl SparsifyScheme {
    /// Scheme keeping on average `d` entries per row of an `n x n` matrix.
    pub fn new(n: usize, d: f64) -> Result<Self> {
        if !(d >= 1.0 && d <= n as f64) {
            return Err(Error::InvalidInput(format!("d = {d} must lie in [1, {n}]")));
        }
        Ok(SparsifyScheme {
            n,
            d,
            rescale: n as f64 / d,
            mode: SampleMode::SymmetricPair,
            jitter: 0.0,
        })
    }

    /// The scheme that always returns `M` itself.
    pub fn exact(n: usize) -> Self {
        Self::new(n, n as f64).expect("d = n is valid")
    }

    pub fn with_mode(mut self, mode: SampleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_jitter(mut self, jitter: f64) -> Result<Self> {
        if !(jitter >= 0.0 && jitter.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "jitter must be non-negative, got {jitter}"
            )));
        }
        self.jitter = jitter;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Keep probability `d/n`.
    pub fn p(&self) -> f64 {
        self.d / self.n as f64
    }

    /// Survivor scale factor `n/d`.
    pub fn rescale(&self) -> f64 {
        self.rescale
    }

    /// True when every draw equals `M`.
    pub fn is_exact(&self) -> bool {
        self.d == self.n as f64 && self.jitter == 0.0
    }
}

/// One symmetric sparse sample in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSample {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseSample {
    /// Builds a sample from upper-triangle entries sorted by `(i, j)`.
    fn from_sorted_upper(n: usize, upper: &[(u32, u32, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in upper {
            counts[i as usize + 1] += 1;
            if i != j {
                counts[j as usize + 1] += 1;
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let row_ptr = counts.clone();
        let mut fill = counts;
        let nnz = row_ptr[n];
        let mut cols = vec![0u32; nnz];
        let mut vals = vec![0.0; nnz];
        for &(i, j, v) in upper {
            let slot = &mut fill[i as usize];
            cols[*slot] = j;
            vals[*slot] = v;
            *slot += 1;
            if i != j {
                let slot = &mut fill[j as usize];
                cols[*slot] = i;
                vals[*slot] = v;
                *slot += 1;
            }
        }
        SparseSample {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Builds a sample from arbitrary upper-triangle triplets.
    pub fn from_upper_triplets(n: usize, mut upper: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, _) in &upper {
            if i > j || j >= n {
                return Err(Error::InvalidInput(format!(
                    "entry ({i}, {j}) is not in the upper triangle of {n}"
                )));
            }
        }
        upper.sort_by_key(|&(i, j, _)| (i, j));
        if upper
            .windows(2)
            .any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::InvalidInput("duplicate entry".into()));
        }
        let packed: Vec<(u32, u32, f64)> = upper
            .into_iter()
            .map(|(i, j, v)| (i as u32, j as u32, v))
            .collect();
        Ok(Self::from_sorted_upper(n, &packed))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored entries, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Column indices and values of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    /// All stored entries `(i, j, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j as usize, x))
        })
    }

    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.triplets().filter(|&(i, j, _)| i <= j)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for (i, j, v) in self.triplets() {
            out[i * self.n + j] = v;
        }
        out
    }

    /// True when every stored entry has its mirror with an identical value.
    pub fn is_symmetric(&self) -> bool {
        self.triplets().all(|(i, j, v)| {
            let (c, vals) = self.row(j);
            c.binary_search(&(i as u32))
                .map(|k| vals[k] == v)
                .unwrap_or(false)
        })
    }

    /// Average nonzeros per row lies in `[d/4, 4d]`. Only meaningful for
    /// `d >= 16` and `n >= 64`; returns true otherwise.
    pub fn density_ok(&self, d: f64) -> bool {
        if d < 16.0 || self.n < 64 {
            return true;
        }
        let per_row = self.nnz() as f64 / self.n as f64;
        per_row >= d / 4.0 && per_row <= 4.0 * d
    }

    /// Writes header `n k` followed by `i j value` for the `k` stored
    /// upper-triangle entries.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        let upper: Vec<_> = self.upper_triplets().collect();
        writeln!(w, "{} {}", self.n, upper.len())?;
        for (i, j, v) in upper {
            writeln!(w, "{i} {j} {v:.16e}")?;
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))??;
        let mut h = header.split_whitespace();
        let parse_usize = |t: Option<&str>, what: &str| -> Result<usize> {
            t.ok_or_else(|| Error::Parse(format!("missing {what}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
        };
        let n = parse_usize(h.next(), "n")?;
        let k = parse_usize(h.next(), "entry count")?;
        let mut upper = Vec::with_capacity(k);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut t = line.split_whitespace();
            let i = parse_usize(t.next(), "row")?;
            let j = parse_usize(t.next(), "column")?;
            let v: f64 = t
                .next()
                .ok_or_else(|| Error::Parse("missing value".into()))?
                .parse()
                .map_err(|e| Error::Parse(format!("bad value: {e}")))?;
            upper.push((i, j, v));
        }
        if upper.len() != k {
            return Err(Error::Parse(format!(
                "header announces {k} entries, found {}",
                upper.len()
            )));
        }
        Self::from_upper_triplets(n, upper)
    }
}

impl LinearOperator for SparseSample {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j as usize]).sum();
        }
    }
}

/// Calls `keep(k)` for each index in `0..len` selected independently with
/// probability `p`, in increasing order.
fn for_each_selected(len: u64, p: f64, rng: &mut Rng, mut keep: impl FnMut(u64)) {
    if p >= 1.0 {
        (0..len).for_each(keep);
        return;
    }
    if p <= 0.5 {
        let gap = Geometric::new(p).expect("0 < p <= 0.5");
        let mut k = gap.sample(rng);
        while k < len {
            keep(k);
            k = k.saturating_add(1).saturating_add(gap.sample(rng));
        }
    } else {
        // sample the dropped positions instead
        let gap = Geometric::new(1.0 - p).expect("0 < 1-p < 0.5");
        let mut drop = gap.sample(rng);
        for k in 0..len {
            if k == drop {
                drop = drop.saturating_add(1).saturating_add(gap.sample(rng));
            } else {
                keep(k);
            }
        }
    }
}

/// Draws one sparsification of `m`.
pub fn draw(m: &SymmetricMatrix, scheme: &SparsifyScheme, rng: &mut Rng) -> SparseSample {
    let n = m.n();
    assert_eq!(n, scheme.n, "scheme built for a different dimension");
    let p = scheme.p();
    let s = scheme.rescale;
    let mut upper: Vec<(u32, u32, f64)> = Vec::new();

    match scheme.mode {
        SampleMode::SymmetricPair => {
            let len = (n * (n + 1) / 2) as u64;
            upper.reserve((len as f64 * p * 1.05) as usize + 16);
            let (mut i, mut row_start, mut row_end) = (0usize, 0u64, n as u64);
            for_each_selected(len, p, rng, |k| {
                while k >= row_end {
                    i += 1;
                    row_start = row_end;
                    row_end += (n - i) as u64;
                }
                let j = i + (k - row_start) as usize;
                let v = m.get(i, j);
                if v != 0.0 {
                    upper.push((i as u32, j as u32, v * s));
                }
            });
        }
        SampleMode::IidEntry => {
            let len = (n * n) as u64;
            let mut keyed: Vec<(u64, f64)> =
                Vec::with_capacity((len as f64 * p * 1.05) as usize + 16);
            for_each_selected(len, p, rng, |k| {
                let (i, j) = ((k / n as u64) as usize, (k % n as u64) as usize);
                let v = m.get(i, j);
                if v != 0.0 {
                    let (a, b) = if i <= j { (i, j) } else { (j, i) };
                    let w = if i == j { v * s } else { 0.5 * (v * s) };
                    keyed.push(((a * n + b) as u64, w));
                }
            });
            keyed.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < keyed.len() {
                let key = keyed[k].0;
                let mut v = keyed[k].1;
                k += 1;
                if k < keyed.len() && keyed[k].0 == key {
                    v += keyed[k].1;
                    k += 1;
                }
                upper.push(((key / n as u64) as u32, (key % n as u64) as u32, v));
            }
        }
    }

    if scheme.jitter > 0.0 {
        let mut merged = Vec::with_capacity(upper.len() + n);
        let mut it = upper.into_iter().peekable();
        for i in 0..n as u32 {
            let noise = rng.random_range(-scheme.jitter..=scheme.jitter);
            match it.peek() {
                Some(&(a, b, v)) if a == i && b == i => {
                    merged.push((i, i, v + noise));
                    it.next();
                }
                _ => merged.push((i, i, noise)),
            }
            while let Some(&(a, b, v)) = it.peek() {
                if a != i {
                    break;
                }
                merged.push((a, b, v));
                it.next();
            }
        }
        upper = merged;
    }

    SparseSample::from_sorted_upper(n, &upper)
}

/// Per-trial values of `‖S − M‖₂ / ‖M‖₂`.
pub fn theta_samples(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    trials: usize,
    rng: &mut Rng,
) -> Vec<f64> {
    let norm_m = operator_norm(m);
    (0..trials)
        .map(|_| {
            if scheme.is_exact() {
                return 0.0;
            }
            let s = draw(m, scheme, rng);
            operator_norm(&Difference { a: &s, b: m }) / norm_m
        })
        .collect()
}

/// Maximum over `trials` draws of `‖S − M‖₂ / ‖M‖₂`.
pub fn estimate_theta(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    trials: usize,
    rng: &mut Rng,
) -> f64 {
    theta_samples(m, scheme, trials.max(1), rng)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Empirical and closed-form values of `n · max Var(S_ij) / ‖M‖₂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEstimate {
    pub empirical: f64,
    pub analytic: f64,
}

/// Closed-form `α` for the given scheme.
pub fn analytic_alpha(m: &SymmetricMatrix, scheme: &SparsifyScheme) -> f64 {
    let n = m.n();
    let k = 1.0 / scheme.p() - 1.0;
    let jitter_var = scheme.jitter * scheme.jitter / 3.0;
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let m2 = m.get(i, j) * m.get(i, j);
            let var = match (scheme.mode, i == j) {
                (_, true) => k * m2 + jitter_var,
                (SampleMode::SymmetricPair, false) => k * m2,
                (SampleMode::IidEntry, false) => 0.5 * k * m2,
            };
            worst = worst.max(var);
        }
    }
    let norm_m = operator_norm(m);
    n as f64 * worst / (norm_m * norm_m)
}

/// Worst-entry sample variance over `trials` draws, in `α` units, next to
/// the closed form.
pub fn estimate_alpha(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    trials: usize,
    rng: &mut Rng,
) -> Result<AlphaEstimate> {
    if trials < 30 {
        return Err(Error::InvalidInput(format!(
            "alpha estimation needs at least 30 trials, got {trials}"
        )));
    }
    let samples: Vec<SparseSample> = (0..trials).map(|_| draw(m, scheme, rng)).collect();
    let norm_m = operator_norm(m);
    Ok(AlphaEstimate {
        empirical: empirical_alpha(m, &samples, norm_m),
        analytic: analytic_alpha(m, scheme),
    })
}

fn empirical_alpha(m: &SymmetricMatrix, samples: &[SparseSample], norm_m: f64) -> f64 {
    let n = m.n();
    let len = n * (n + 1) / 2;
    let mut sum = vec![0.0; len];
    let mut sum_sq = vec![0.0; len];
    let index = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j;
    for s in samples {
        for (i, j, v) in s.upper_triplets() {
            let k = index(i, j);
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    let t = samples.len() as f64;
    let worst = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s1, s2)| ((s2 - s1 * s1 / t) / (t - 1.0)).max(0.0))
        .fold(0.0, f64::max);
    n as f64 * worst / (norm_m * norm_m)
}

/// Quality summary of a scheme over one batch of draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifierQuality {
    pub theta_hat: f64,
    pub alpha_hat: f64,
    /// `‖mean(S) − M‖₂ / ‖M‖₂` over the batch.
    pub bias_norm: f64,
}

pub fn assess_quality(
    m: &SymmetricMatrix,
    scheme: &SparsifyScheme,
    trials: usize,
    rng: &mut Rng,
) -> Result<SparsifierQuality> {
    let n = m.n();
    let norm_m = operator_norm(m);
    let mut mean = vec![0.0; n * n];
    let mut theta_hat = 0.0_f64;
    let samples: Vec<SparseSample> = (0..trials.max(30)).map(|_| draw(m, scheme, rng)).collect();
    for s in &samples {
        theta_hat = theta_hat.max(operator_norm(&Difference { a: s, b: m }) / norm_m);
        for (i, j, v) in s.triplets() {
            mean[i * n + j] += v;
        }
    }
    let t = samples.len() as f64;
    for (k, v) in mean.iter_mut().enumerate() {
        *v = *v / t - m.as_slice()[k];
    }
    let bias = SymmetricMatrix::from_dense(n, mean)?;
    Ok(SparsifierQuality {
        theta_hat,
        alpha_hat: empirical_alpha(m, &samples, norm_m),
        bias_norm: operator_norm(&bias) / norm_m,
    })
}

/// Smallest `d` whose estimated `θ` is at most `target`. Bisects the logit
/// of the keep probability `d/n`, so both `d` and `n − d` are resolved to
/// about 0.1% relative. The same random stream is reused at every probe so
/// the estimate is monotone along the search.
pub fn calibrate_d(
    m: &SymmetricMatrix,
    target: f64,
    mode: SampleMode,
    trials: usize,
    stream: SeedStream,
) -> Result<f64> {
    let n = m.n() as f64;
    if !(target > 0.0) {
        return Err(Error::InvalidInput(format!(
            "target theta must be positive, got {target}"
        )));
    }
    let d_of = |z: f64| n / (1.0 + (-z).exp());
    let theta_at = |d: f64| -> Result<f64> {
        let scheme = SparsifyScheme::new(m.n(), d.clamp(1.0, n))?.with_mode(mode);
        Ok(estimate_theta(m, &scheme, trials, &mut stream.rng()))
    };
    if theta_at(1.0)? <= target {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (-(n - 1.0).ln(), 1e-12f64.recip().ln());
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if theta_at(d_of(mid))? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(d_of(hi).clamp(1.0, n))
}

/// Ensemble constant `C = max_d θ̂(d) · √d` over a grid of `d` values.
pub fn calibrate_constant(
    m: &SymmetricMatrix,
    mode: SampleMode,
    d_grid: &[f64],
    trials: usize,
    stream: SeedStream,
) -> Result<f64> {
    let mut c = 0.0_f64;
    for (k, &d) in d_grid.iter().enumerate() {
        let scheme = SparsifyScheme::new(m.n(), d)?.with_mode(mode);
        let theta = estimate_theta(m, &scheme, trials, &mut stream.child(k as u64).rng());
        c = c.max(theta * d.sqrt());
    }
    Ok(c)
}

/// `d = ⌈(C/θ)²⌉`, clamped to `[1, n]`.
pub fn d_for_theta(c: f64, theta: f64, n: usize) -> f64 {
    ((c / theta).powi(2).ceil()).clamp(1.0, n as f64)
}
