//! Empirical checks of the random-product chain on projective space:
//! contraction inside the good set, absorption, mixing, the stationary
//! bias, and the variance of time averages.

use serde::Serialize;

use crate::error::Result;
use crate::estimators::bounds::{
    contraction_bound, good_set_radius, single_sample_variance_bound, stationary_bias_bound,
    theta_hypothesis, time_average_variance_bound,
};
use crate::linalg::{
    dot, norm, proj_distance_unit, project_orthogonal, spectral_oracle, SymmetricMatrix,
};
use crate::par::Executor;
use crate::rng::{gaussian_vector, Rng, SeedStream};
use crate::sparsifier::{draw, estimate_theta, SparsifyScheme};
use crate::stats;

/// Everything a diagnostic needs about the chain.
#[derive(Debug, Clone)]
pub struct ChainSetup {
    pub m: SymmetricMatrix,
    pub scheme: SparsifyScheme,
    pub u: Vec<f64>,
    pub l2: f64,
    pub theta: f64,
}

impl ChainSetup {
    /// Takes `u` and `l2` from the oracle and `θ` from `theta_trials` draws.
    pub fn new(
        m: SymmetricMatrix,
        scheme: SparsifyScheme,
        theta_trials: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        let spec = spectral_oracle(&m)?;
        let theta = estimate_theta(&m, &scheme, theta_trials, rng);
        Ok(ChainSetup {
            u: spec.u().to_vec(),
            l2: spec.l2(),
            m,
            scheme,
            theta,
        })
    }

    /// Radius of the good set `G`.
    pub fn radius(&self) -> f64 {
        good_set_radius(self.theta, self.l2)
    }

    pub fn rho_bound(&self) -> f64 {
        contraction_bound(self.l2)
    }

    /// Warning text when `θ` exceeds the contraction hypothesis.
    pub fn hypothesis_warning(&self) -> Option<String> {
        let limit = theta_hypothesis(self.l2);
        (self.theta > limit).then(|| {
            format!(
                "theta = {:.4} exceeds the contraction hypothesis {:.4}; proceeding",
                self.theta, limit
            )
        })
    }

    /// Point at distance `r` from `u` in a uniformly random tangent direction.
    pub fn point_at(&self, r: f64, rng: &mut Rng) -> Vec<f64> {
        let w = self.tangent_direction(rng);
        self.point_along(&w, r)
    }

    fn tangent_direction(&self, rng: &mut Rng) -> Vec<f64> {
        loop {
            let w = project_orthogonal(&gaussian_vector(self.u.len(), rng), &self.u);
            let nw = norm(&w);
            if nw > 0.0 {
                return w.iter().map(|v| v / nw).collect();
            }
        }
    }

    fn point_along(&self, w: &[f64], r: f64) -> Vec<f64> {
        let s = r.min(1.0);
        let c = (1.0 - s * s).sqrt();
        self.u
            .iter()
            .zip(w)
            .map(|(ui, wi)| c * ui + s * wi)
            .collect()
    }

    /// Uniform direction, radius uniform in `[0, radius]`.
    pub fn sample_good_set(&self, rng: &mut Rng) -> Vec<f64> {
        use rand::Rng as _;
        let r = self.radius() * rng.random::<f64>();
        self.point_at(r, rng)
    }

    /// One step `x <- Sx/‖Sx‖` with a fresh sample. Returns `None` in the
    /// measure-zero event `Sx = 0`.
    pub fn step(&self, x: &[f64], rng: &mut Rng) -> Option<Vec<f64>> {
        let s = draw(&self.m, &self.scheme, rng);
        apply_normalized(&s, x)
    }
}

fn apply_normalized(s: &crate::sparsifier::SparseSample, x: &[f64]) -> Option<Vec<f64>> {
    use crate::linalg::LinearOperator;
    let mut y = vec![0.0; x.len()];
    s.apply(x, &mut y);
    let ny = norm(&y);
    (ny > 0.0 && ny.is_finite()).then(|| y.iter().map(|v| v / ny).collect())
}

/// Representative of `x` with `⟨u, x⟩ >= 0`.
fn aligned(x: &[f64], u: &[f64]) -> Vec<f64> {
    if dot(x, u) >= 0.0 {
        x.to_vec()
    } else {
        x.iter().map(|v| -v).collect()
    }
}

/// Empirical contraction of projective distance under one random step.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    /// Mean of `d(Sx,Sy)/d(x,y)` over all pairs and draws.
    pub rho_empirical: f64,
    pub rho_bound: f64,
    /// Total number of ratios.
    pub samples: usize,
    pub pairs: usize,
    pub draws_per_pair: usize,
    /// Pairs whose mean ratio exceeds the bound by more than 3 standard errors.
    pub violations: usize,
    pub max_pair_mean: f64,
    pub theta: f64,
    pub l2: f64,
    pub warning: Option<String>,
}

/// Samples `pairs` point pairs in `G` and `draws_per_pair` sparsifications
/// for each, comparing mean contraction with `1 − 0.8(1−l2)`.
pub fn measure_contraction(
    setup: &ChainSetup,
    pairs: usize,
    draws_per_pair: usize,
    stream: SeedStream,
    exec: &Executor,
) -> ContractionReport {
    let bound = setup.rho_bound();
    let per_pair: Vec<(f64, f64, usize)> = exec.map(pairs, |p| {
        let mut rng = stream.child(p as u64).rng();
        let (x, y, dxy) = loop {
            let x = setup.sample_good_set(&mut rng);
            let y = setup.sample_good_set(&mut rng);
            let dxy = proj_distance_unit(&x, &y);
            if dxy > 0.0 {
                break (x, y, dxy);
            }
        };
        let mut ratios = Vec::with_capacity(draws_per_pair);
        for _ in 0..draws_per_pair {
            let s = draw(&setup.m, &setup.scheme, &mut rng);
            if let (Some(sx), Some(sy)) = (apply_normalized(&s, &x), apply_normalized(&s, &y)) {
                ratios.push(proj_distance_unit(&sx, &sy) / dxy);
            }
        }
        (stats::mean(&ratios), stats::std_dev(&ratios), ratios.len())
    });
    let samples: usize = per_pair.iter().map(|p| p.2).sum();
    let total: f64 = per_pair.iter().map(|p| p.0 * p.2 as f64).sum();
    let violations = per_pair
        .iter()
        .filter(|(m, sd, k)| m - 3.0 * sd / (*k as f64).sqrt() > bound)
        .count();
    ContractionReport {
        rho_empirical: total / samples as f64,
        rho_bound: bound,
        samples,
        pairs,
        draws_per_pair,
        violations,
        max_pair_mean: per_pair.iter().map(|p| p.0).fold(0.0, f64::max),
        theta: setup.theta,
        l2: setup.l2,
        warning: setup.hypothesis_warning(),
    }
}

/// Burn-in horizon `⌈10 log(1/tol)/(1−ρ)⌉`.
pub fn mixing_horizon(tol: f64, rho: f64) -> usize {
    (10.0 * (1.0 / tol).ln() / (1.0 - rho)).ceil() as usize
}

/// Convergence of the chain towards its long-run law.
#[derive(Debug, Clone, Serialize)]
pub struct StationarityReport {
    /// `|E f(X_t) − μ̂(f)|` for `t = 0..=t_max`.
    pub mixing_curve: Vec<f64>,
    /// Monte Carlo standard error of each curve point.
    pub curve_se: Vec<f64>,
    /// Exponential decay rate fitted on the part of the curve above noise.
    pub fitted_rate: Option<f64>,
    pub rho_bound: f64,
    /// `d(u, μ̂ barycenter)`.
    pub mu_mean_dist: f64,
    pub bias_bound: f64,
    /// Chain states outside `G` after the start.
    pub escapes: usize,
    pub replicas: usize,
    pub t_max: usize,
    pub theta: f64,
    pub l2: f64,
    /// Mean of the `u`-aligned states at `t_max`.
    #[serde(skip)]
    pub mu_hat: Vec<f64>,
    #[serde(skip)]
    pub x0: Vec<f64>,
    pub warning: Option<String>,
}

impl StationarityReport {
    /// CSV with header `t,probe_gap`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("t,probe_gap\n");
        for (t, v) in self.mixing_curve.iter().enumerate() {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }

    /// `key: value` summary lines.
    pub fn summary(&self) -> String {
        let rate = self
            .fitted_rate
            .map_or("none".to_string(), |r| r.to_string());
        format!(
            "replicas: {}\nt_max: {}\ntheta: {}\nl2: {}\nfitted_rate: {}\nrho_bound: {}\nmu_mean_dist: {}\nbias_bound: {}\nescapes: {}\n",
            self.replicas, self.t_max, self.theta, self.l2, rate, self.rho_bound, self.mu_mean_dist, self.bias_bound, self.escapes
        )
    }
}

/// Runs `replicas` chains from a common start on the boundary of `G` and
/// tracks the probe `f(x) = ⟨v, x⟩²`. The probe direction combines `u` with
/// the random offset direction of the start, so it sees the displacement.
pub fn measure_mixing(
    setup: &ChainSetup,
    t_max: usize,
    replicas: usize,
    stream: SeedStream,
    exec: &Executor,
) -> StationarityReport {
    let mut rng = stream.rng();
    let w0 = setup.tangent_direction(&mut rng);
    let x0 = setup.point_along(&w0, 0.999 * setup.radius());
    let v: Vec<f64> = {
        let raw: Vec<f64> = setup.u.iter().zip(&w0).map(|(a, b)| a + b).collect();
        let nv = norm(&raw);
        raw.iter().map(|x| x / nv).collect()
    };
    let radius = setup.radius();
    let runs: Vec<(Vec<f64>, Vec<f64>, usize)> = exec.map(replicas, |k| {
        let mut rng = stream.child(k as u64 + 1).rng();
        let mut x = x0.clone();
        let mut probe = Vec::with_capacity(t_max + 1);
        probe.push(dot(&v, &x).powi(2));
        let mut escapes = 0;
        for _ in 0..t_max {
            if let Some(nx) = setup.step(&x, &mut rng) {
                x = nx;
            }
            if proj_distance_unit(&x, &setup.u) > radius {
                escapes += 1;
            }
            probe.push(dot(&v, &x).powi(2));
        }
        (probe, aligned(&x, &setup.u), escapes)
    });

    let r = runs.len() as f64;
    let column = |t: usize| -> Vec<f64> { runs.iter().map(|run| run.0[t]).collect() };
    let mu_f = stats::mean(&column(t_max));
    let mut curve = Vec::with_capacity(t_max + 1);
    let mut se = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let c = column(t);
        curve.push((stats::mean(&c) - mu_f).abs());
        se.push(stats::std_dev(&c) / r.sqrt());
    }
    let floor = se[t_max];
    let mut pts_t = Vec::new();
    let mut pts_y = Vec::new();
    for t in 0..t_max {
        if curve[t] > 4.0 * (se[t] + floor) && curve[t] > 0.0 {
            pts_t.push(t as f64);
            pts_y.push(curve[t].ln());
        } else {
            break;
        }
    }
    let fitted_rate = (pts_t.len() >= 2).then(|| stats::slope(&pts_t, &pts_y).exp());

    let n = setup.u.len();
    let mut mu_hat = vec![0.0; n];
    for run in &runs {
        for (m, x) in mu_hat.iter_mut().zip(&run.1) {
            *m += x / r;
        }
    }
    let nm = norm(&mu_hat);
    let bary: Vec<f64> = mu_hat.iter().map(|v| v / nm).collect();
    StationarityReport {
        mixing_curve: curve,
        curve_se: se,
        fitted_rate,
        rho_bound: setup.rho_bound(),
        mu_mean_dist: proj_distance_unit(&bary, &setup.u),
        bias_bound: stationary_bias_bound(setup.theta, setup.l2),
        escapes: runs.iter().map(|run| run.2).sum(),
        replicas,
        t_max,
        theta: setup.theta,
        l2: setup.l2,
        mu_hat,
        x0,
        warning: setup.hypothesis_warning(),
    }
}

/// Mean squared deviation of a time average from the stationary mean.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VarianceReport {
    pub t: usize,
    pub replicas: usize,
    pub estimate: f64,
    pub bound: f64,
    pub single_sample_bound: f64,
}

/// Estimates `E‖(1/t) Σ f(X_l) − μ̂(f)‖²` with `f` the `u`-aligned
/// representative, starting from the mixing run's start point.
pub fn variance_of_time_average(
    setup: &ChainSetup,
    mixing: &StationarityReport,
    t: usize,
    replicas: usize,
    stream: SeedStream,
    exec: &Executor,
) -> VarianceReport {
    let n = setup.u.len();
    let values: Vec<f64> = exec.map(replicas, |k| {
        let mut rng = stream.child(k as u64).rng();
        let mut x = mixing.x0.clone();
        let mut avg = vec![0.0; n];
        for _ in 0..t {
            if let Some(nx) = setup.step(&x, &mut rng) {
                x = nx;
            }
            let f = aligned(&x, &setup.u);
            for (a, v) in avg.iter_mut().zip(&f) {
                *a += v / t as f64;
            }
        }
        avg.iter()
            .zip(&mixing.mu_hat)
            .map(|(a, m)| (a - m).powi(2))
            .sum()
    });
    VarianceReport {
        t,
        replicas,
        estimate: stats::mean(&values),
        bound: time_average_variance_bound(setup.theta, setup.l2, t),
        single_sample_bound: single_sample_variance_bound(setup.theta, setup.l2),
    }
}

/// Escapes from `G` of chains started inside it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AbsorptionReport {
    pub steps_total: usize,
    pub escapes: usize,
    pub max_distance: f64,
    pub radius: f64,
}

pub fn absorbing_check(
    setup: &ChainSetup,
    replicas: usize,
    steps: usize,
    stream: SeedStream,
    exec: &Executor,
) -> AbsorptionReport {
    let radius = setup.radius();
    let per: Vec<(usize, f64)> = exec.map(replicas, |k| {
        let mut rng = stream.child(k as u64).rng();
        let mut x = setup.sample_good_set(&mut rng);
        let mut escapes = 0;
        let mut worst = 0.0_f64;
        for _ in 0..steps {
            if let Some(nx) = setup.step(&x, &mut rng) {
                x = nx;
            }
            let d = proj_distance_unit(&x, &setup.u);
            worst = worst.max(d);
            if d > radius {
                escapes += 1;
            }
        }
        (escapes, worst)
    });
    AbsorptionReport {
        steps_total: replicas * steps,
        escapes: per.iter().map(|p| p.0).sum(),
        max_distance: per.iter().map(|p| p.1).fold(0.0, f64::max),
        radius,
    }
}
