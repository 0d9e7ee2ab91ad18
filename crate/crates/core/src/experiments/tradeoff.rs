use super::{random_block, ExperimentConfig, MatrixSource, MdsInstance};
use crate::error::{Error, Result};
use crate::estimators::{gossip_pca_multi, power_method_block, BlockRun, PcaConfig};
use crate::gossip::{ComplexityLedger, GossipAvgConfig, Reduction};
use crate::linalg::{spectral_oracle, SymmetricMatrix};
use crate::par::Executor;
use crate::rng::SeedStream;
use crate::sparsifier::SparsifyScheme;
use crate::stats;

/// The two estimators being compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Power iteration on one fixed sparsification.
    PowerMethod,
    /// Fresh sparsification every round, averaged.
    GossipPca,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PowerMethod => "power_method",
            Method::GossipPca => "gossip_pca",
        }
    }
}

/// Mean error as a function of `χ` for one method and one `d`.
#[derive(Debug, Clone)]
pub struct Curve {
    pub method: Method,
    pub d: f64,
    pub chi: Vec<f64>,
    pub err: Vec<f64>,
}

/// Best error over `d` at one budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffRow {
    pub chi: f64,
    pub method: Method,
    pub d: f64,
    pub err: f64,
}

#[derive(Debug, Clone)]
pub struct TradeoffReport {
    pub rows: Vec<TradeoffRow>,
    /// Per-`d` curves on the configured grid.
    pub curves: Vec<Curve>,
    /// Budget above which the densest power-method curve stays below the
    /// sparsest one, located on a fine log grid.
    pub pm_crossover: Option<f64>,
    /// Log-log slope of the best gossip-PCA error against `χ`.
    pub gossip_slope: f64,
    /// The same slope over the top decade of the grid only.
    pub gossip_tail_slope: f64,
    pub seed: u64,
}

impl TradeoffReport {
    /// CSV with header `chi,method,d,err,seed`.
    pub fn csv(&self) -> String {
        let mut out = String::from("chi,method,d,err,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.chi,
                r.method.name(),
                r.d,
                r.err,
                self.seed
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let cross = self
            .pm_crossover
            .map_or("none".to_string(), |c| format!("{c:.0}"));
        format!(
            "pm_crossover: {cross}\ngossip_slope: {:.4}\ngossip_tail_slope: {:.4}\n",
            self.gossip_slope, self.gossip_tail_slope
        )
    }

    pub fn curve(&self, method: Method, d: f64) -> Option<&Curve> {
        self.curves.iter().find(|c| c.method == method && c.d == d)
    }
}

/// Default budget grid: 9 log-spaced points from 10³ to 10⁵.
pub fn default_chi_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(3.0 + 0.25 * k as f64)).collect()
}

/// Error after the last round whose cumulative `χ` fits in `budget`.
fn error_at(trace: &[(f64, f64)], budget: f64) -> f64 {
    let mut e = trace[0].1;
    for &(c, err) in trace {
        if c <= budget {
            e = err;
        } else {
            break;
        }
    }
    e
}

/// Target matrix and reference basis for the tradeoff experiment.
pub fn tradeoff_target(
    cfg: &ExperimentConfig,
    stream: SeedStream,
) -> Result<(SymmetricMatrix, Vec<Vec<f64>>)> {
    match cfg.matrix_source {
        MatrixSource::Mds => {
            let inst = MdsInstance::random(cfg.n, &mut stream.rng())?;
            let basis = inst.true_basis(2)?;
            Ok((inst.centered, basis))
        }
        _ => {
            let m = super::build_matrix(cfg, stream)?;
            let u = spectral_oracle(&m)?.u().to_vec();
            Ok((m, vec![u]))
        }
    }
}

/// Error against `χ` for both estimators and every `d`, then the best `d`
/// per budget.
pub fn run_tradeoff(cfg: &ExperimentConfig, exec: &Executor) -> Result<TradeoffReport> {
    cfg.validate()?;
    let root = SeedStream::new(cfg.seed);
    let (m, basis) = tradeoff_target(cfg, root.child(0))?;
    let n = m.n();
    let r = basis.len();
    let d_list: Vec<f64> = if cfg.d_list.is_empty() {
        vec![(n as f64 / 20.0).max(1.0), n as f64 / 2.0]
    } else {
        cfg.d_list.clone()
    };
    let grid = if cfg.chi_list.is_empty() {
        default_chi_grid()
    } else {
        cfg.chi_list.clone()
    };
    let chi_max = grid.iter().cloned().fold(0.0, f64::max);
    let reduction = if cfg.exact_reduction {
        Reduction::Exact
    } else {
        Reduction::Gossip(GossipAvgConfig::new(cfg.epsilon)?)
    };
    let methods = [Method::PowerMethod, Method::GossipPca];

    // cell = (method, d, trial)
    let per_method = d_list.len() * cfg.trials;
    let cells = methods.len() * per_method;
    let traces: Vec<Result<Vec<(f64, f64)>>> = exec.map(cells, |c| {
        let (mi, rest) = (c / per_method, c % per_method);
        let (di, k) = (rest / cfg.trials, rest % cfg.trials);
        let d = d_list[di];
        let scheme = SparsifyScheme::new(n, d)?.with_mode(cfg.mode);
        let t = ((1.05 * chi_max / (r as f64 * d)).ceil() as usize).max(1) + 1;
        let stream = root
            .child(1)
            .child(mi as u64)
            .child(di as u64)
            .child(k as u64);
        let mut rng = stream.rng();
        let x0 = random_block(n, r, &mut rng);
        let pcfg = PcaConfig {
            reduction,
            checkpoints: (1..=t).collect(),
            ..Default::default()
        };
        let mut ledger = ComplexityLedger::new(n);
        let run: BlockRun = match methods[mi] {
            Method::PowerMethod => {
                power_method_block(&m, &scheme, &x0, t, &pcfg, &mut rng, &mut ledger)?
            }
            Method::GossipPca => {
                gossip_pca_multi(&m, &scheme, &x0, t, &pcfg, &mut rng, &mut ledger)?
            }
        };
        let mut trace = vec![(0.0, cfg.metric.eval(&basis, &x0))];
        trace.extend(
            run.checkpoints
                .iter()
                .map(|cp| (cp.chi, cfg.metric.eval(&basis, &cp.basis))),
        );
        Ok(trace)
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;

    let mean_on = |mi: usize, di: usize, budgets: &[f64]| -> Vec<f64> {
        budgets
            .iter()
            .map(|&b| {
                let v: Vec<f64> = (0..cfg.trials)
                    .map(|k| error_at(&traces[mi * per_method + di * cfg.trials + k], b))
                    .collect();
                stats::mean(&v)
            })
            .collect()
    };

    let mut curves = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (di, &d) in d_list.iter().enumerate() {
            curves.push(Curve {
                method,
                d,
                chi: grid.clone(),
                err: mean_on(mi, di, &grid),
            });
        }
    }
    let mut rows = Vec::new();
    for (gi, &chi) in grid.iter().enumerate() {
        for &method in &methods {
            let best = curves
                .iter()
                .filter(|c| c.method == method)
                .min_by(|a, b| a.err[gi].total_cmp(&b.err[gi]))
                .ok_or_else(|| Error::InvalidInput("empty d list".into()))?;
            rows.push(TradeoffRow {
                chi,
                method,
                d: best.d,
                err: best.err[gi],
            });
        }
    }

    let (lo_i, hi_i) = {
        let lo = d_list
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|p| p.0)
            .unwrap_or(0);
        let hi = d_list
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|p| p.0)
            .unwrap_or(0);
        (lo, hi)
    };
    let chi_min = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let fine: Vec<f64> = (0..400)
        .map(|k| chi_min * (chi_max / chi_min).powf(k as f64 / 399.0))
        .collect();
    let pm_crossover = if lo_i == hi_i {
        None
    } else {
        let sparse = mean_on(0, lo_i, &fine);
        let dense = mean_on(0, hi_i, &fine);
        // The threshold above which the dense curve stays ahead: the last
        // lead change inside the grid, provided the dense curve still leads
        // at the end. A curve that leads from the first point has none.
        let ahead: Vec<bool> = sparse.iter().zip(&dense).map(|(s, d)| d < s).collect();
        match ahead.last() {
            Some(true) => (1..fine.len())
                .rev()
                .find(|&k| !ahead[k - 1])
                .map(|k| fine[k]),
            _ => None,
        }
    };
    let gossip_best: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == Method::GossipPca)
        .map(|r| r.err)
        .collect();
    let gossip_slope = stats::loglog_slope(&grid, &gossip_best);
    let (tail_chi, tail_err): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .zip(&gossip_best)
        .filter(|(c, _)| **c >= chi_max / 10.0)
        .map(|(c, e)| (*c, *e))
        .unzip();
    let gossip_tail_slope = if tail_chi.len() >= 2 {
        stats::loglog_slope(&tail_chi, &tail_err)
    } else {
        f64::NAN
    };

    Ok(TradeoffReport {
        rows,
        curves,
        pm_crossover,
        gossip_slope,
        gossip_tail_slope,
        seed: cfg.seed,
    })
}
