use super::{random_block, ExperimentConfig, MdsInstance};
use crate::error::Result;
use crate::estimators::{gossip_pca_multi, PcaConfig};
use crate::gossip::{ComplexityLedger, GossipAvgConfig, Reduction};
use crate::par::Executor;
use crate::rng::SeedStream;
use crate::sparsifier::SparsifyScheme;
use crate::stats;

/// Mean alignment error at one budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositioningRow {
    pub chi: f64,
    pub d: f64,
    pub delta: f64,
}

#[derive(Debug, Clone)]
pub struct PositioningReport {
    pub rows: Vec<PositioningRow>,
    /// Rank correlation of the smoothed error with `χ`.
    pub spearman: f64,
    pub seed: u64,
}

impl PositioningReport {
    /// CSV with header `chi,d,delta,seed`.
    pub fn csv(&self) -> String {
        let mut out = String::from("chi,d,delta,seed\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.chi, r.d, r.delta, self.seed));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!("spearman: {:.4}\n", self.spearman)
    }
}

/// Default grid: 9 log-spaced budgets from 10³ to 10⁴.
pub fn default_positioning_grid() -> Vec<f64> {
    (0..9).map(|k| 10f64.powf(3.0 + 0.125 * k as f64)).collect()
}

/// Top-2 eigenvectors of a random MDS instance by gossip PCA, scored by
/// the Procrustes-aligned error at each budget.
pub fn run_positioning(cfg: &ExperimentConfig, exec: &Executor) -> Result<PositioningReport> {
    cfg.validate()?;
    let root = SeedStream::new(cfg.seed);
    let inst = MdsInstance::random(cfg.n, &mut root.child(0).rng())?;
    let basis = inst.true_basis(2)?;
    let n = inst.n();
    let d = cfg.d.unwrap_or((n as f64 / 10.0).max(1.0));
    let scheme = SparsifyScheme::new(n, d)?.with_mode(cfg.mode);
    let grid = if cfg.chi_list.is_empty() {
        default_positioning_grid()
    } else {
        cfg.chi_list.clone()
    };
    let chi_max = grid.iter().cloned().fold(0.0, f64::max);
    let t = cfg
        .t
        .unwrap_or(((1.05 * chi_max / (2.0 * d)).ceil() as usize).max(1) + 1);
    let reduction = if cfg.exact_reduction {
        Reduction::Exact
    } else {
        Reduction::Gossip(GossipAvgConfig::new(cfg.epsilon)?)
    };
    let traces: Vec<Result<Vec<(f64, f64)>>> = exec.map(cfg.trials, |k| {
        let mut rng = root.child(1).child(k as u64).rng();
        let x0 = random_block(n, 2, &mut rng);
        let pcfg = PcaConfig {
            reduction,
            checkpoints: (1..=t).collect(),
            ..Default::default()
        };
        let mut ledger = ComplexityLedger::new(n);
        let run = gossip_pca_multi(
            &inst.centered,
            &scheme,
            &x0,
            t,
            &pcfg,
            &mut rng,
            &mut ledger,
        )?;
        let mut trace = vec![(0.0, cfg.metric.eval(&basis, &x0))];
        trace.extend(
            run.checkpoints
                .iter()
                .map(|cp| (cp.chi, cfg.metric.eval(&basis, &cp.basis))),
        );
        Ok(trace)
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>>>()?;
    let rows: Vec<PositioningRow> = grid
        .iter()
        .map(|&chi| {
            let v: Vec<f64> = traces
                .iter()
                .map(|tr| {
                    tr.iter()
                        .take_while(|(c, _)| *c <= chi)
                        .last()
                        .map_or(tr[0].1, |p| p.1)
                })
                .collect();
            PositioningRow {
                chi,
                d,
                delta: stats::mean(&v),
            }
        })
        .collect();
    let deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let spearman = stats::spearman(&grid, &stats::smooth(&deltas, 5));
    Ok(PositioningReport {
        rows,
        spearman,
        seed: cfg.seed,
    })
}
