use super::{synthetic_for, ExperimentConfig};
use crate::error::{Error, Result};
use crate::estimators::random_start;
use crate::linalg::{norm, proj_distance_unit, spectral_oracle, LinearOperator, SymmetricMatrix};
use crate::par::Executor;
use crate::rng::SeedStream;
use crate::sparsifier::{draw, SparsifyScheme};
use crate::stats;

pub const DEFAULT_D_LIST: [f64; 4] = [40.0, 80.0, 160.0, 320.0];

/// Meeting time and error of one coupled pair of trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeetingTrial {
    pub d: f64,
    /// First round at which the two trajectories agree; `None` if censored.
    pub tau: Option<usize>,
    pub err: Option<f64>,
}

/// One table row: averages over the uncensored trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmstartRow {
    pub d: f64,
    pub tau: f64,
    pub err: f64,
    pub censored: usize,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct WarmstartTable {
    pub rows: Vec<WarmstartRow>,
    pub trials: Vec<MeetingTrial>,
    pub seed: u64,
}

impl WarmstartTable {
    /// CSV with header `d,tau,err,censored,trials,seed`.
    pub fn csv(&self) -> String {
        let mut out = String::from("d,tau,err,censored,trials,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.d, r.tau, r.err, r.censored, r.trials, self.seed
            ));
        }
        out
    }
}

fn step(s: &crate::sparsifier::SparseSample, x: &[f64]) -> Option<Vec<f64>> {
    let mut y = vec![0.0; x.len()];
    s.apply(x, &mut y);
    let ny = norm(&y);
    (ny > 0.0 && ny.is_finite()).then(|| y.iter().map(|v| v / ny).collect())
}

/// Runs the random-start and `u`-start chains with the same sparsification
/// every round until they agree to `tol` up to sign.
pub fn meeting_trial(
    m: &SymmetricMatrix,
    u: &[f64],
    scheme: &SparsifyScheme,
    t_cap: usize,
    tol: f64,
    stream: SeedStream,
) -> MeetingTrial {
    let mut rng = stream.rng();
    let mut xr = random_start(m.n(), &mut rng);
    let mut xu = u.to_vec();
    for t in 1..=t_cap {
        let s = draw(m, scheme, &mut rng);
        match (step(&s, &xr), step(&s, &xu)) {
            (Some(a), Some(b)) => {
                xr = a;
                xu = b;
            }
            _ => break,
        }
        let minus: f64 = xr
            .iter()
            .zip(&xu)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let plus: f64 = xr
            .iter()
            .zip(&xu)
            .map(|(a, b)| (a + b).powi(2))
            .sum::<f64>()
            .sqrt();
        if minus.min(plus) <= tol {
            return MeetingTrial {
                d: scheme.d(),
                tau: Some(t),
                err: Some(proj_distance_unit(&xr, u)),
            };
        }
    }
    MeetingTrial {
        d: scheme.d(),
        tau: None,
        err: None,
    }
}

/// Meeting time `τ` and error at `τ` for each `d`, over `cfg.trials` runs.
pub fn run_warmstart_table(cfg: &ExperimentConfig, exec: &Executor) -> Result<WarmstartTable> {
    cfg.validate()?;
    let root = SeedStream::new(cfg.seed);
    let m = synthetic_for(cfg, root.child(0))?;
    let u = spectral_oracle(&m)?.u().to_vec();
    let d_list: Vec<f64> = if cfg.d_list.is_empty() {
        // Default entries that do not fit the matrix are dropped.
        DEFAULT_D_LIST
            .iter()
            .copied()
            .filter(|&d| d <= m.n() as f64)
            .collect()
    } else {
        cfg.d_list.clone()
    };
    if d_list.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no default d fits n = {}; set d_list",
            m.n()
        )));
    }
    let schemes = d_list
        .iter()
        .map(|&d| Ok(SparsifyScheme::new(m.n(), d)?.with_mode(cfg.mode)))
        .collect::<Result<Vec<_>>>()?;
    let cells = d_list.len() * cfg.trials;
    let trials = exec.map(cells, |c| {
        let (di, k) = (c / cfg.trials, c % cfg.trials);
        meeting_trial(
            &m,
            &u,
            &schemes[di],
            cfg.t_cap,
            cfg.meet_tol,
            root.child(1).child(di as u64).child(k as u64),
        )
    });
    let rows = d_list
        .iter()
        .enumerate()
        .map(|(di, &d)| {
            let cell = &trials[di * cfg.trials..(di + 1) * cfg.trials];
            let taus: Vec<f64> = cell
                .iter()
                .filter_map(|t| t.tau.map(|v| v as f64))
                .collect();
            let errs: Vec<f64> = cell.iter().filter_map(|t| t.err).collect();
            let avg = |v: &[f64]| {
                if v.is_empty() {
                    f64::NAN
                } else {
                    stats::mean(v)
                }
            };
            WarmstartRow {
                d,
                tau: avg(&taus),
                err: avg(&errs),
                censored: cfg.trials - taus.len(),
                trials: cfg.trials,
            }
        })
        .collect();
    Ok(WarmstartTable {
        rows,
        trials,
        seed: cfg.seed,
    })
}
