//! Synchronous simulation of the decentralized machinery: sparse
//! matrix-vector rounds, pairwise gossip averaging, and cost accounting.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::sparsifier::SparseSample;

/// Per-node values of one tracked vector at a given round.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    values: Vec<f64>,
    round: usize,
}

impl NetworkState {
    pub fn new(values: Vec<f64>) -> Self {
        NetworkState { values, round: 0 }
    }

    pub fn with_round(values: Vec<f64>, round: usize) -> Self {
        NetworkState { values, round }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Cumulative communication and arithmetic counts, summed over nodes.
///
/// Matrix-vector traffic and gossip-averaging traffic are kept apart so the
/// averaging overhead can be included or left out of `χ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ComplexityLedger {
    n: usize,
    reals_sent: u64,
    mults: u64,
    gossip_reals: u64,
    gossip_rounds: u64,
}

impl ComplexityLedger {
    pub fn new(n: usize) -> Self {
        ComplexityLedger {
            n,
            ..Default::default()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One real sent and one multiply-add per stored entry, per tracked vector.
    pub fn charge_spmv(&mut self, nnz: usize, width: usize) {
        self.reals_sent += (nnz * width) as u64;
        self.mults += (nnz * width) as u64;
    }

    pub fn charge_gossip(&mut self, reals: u64, rounds: u64) {
        self.gossip_reals += reals;
        self.gossip_rounds += rounds;
    }

    /// Reals sent per node by matrix-vector rounds: the budget `χ`.
    pub fn chi(&self) -> f64 {
        self.reals_sent as f64 / self.n.max(1) as f64
    }

    pub fn mults_per_node(&self) -> f64 {
        self.mults as f64 / self.n.max(1) as f64
    }

    /// Reals sent per node by gossip averaging.
    pub fn gossip_reals_per_node(&self) -> f64 {
        self.gossip_reals as f64 / self.n.max(1) as f64
    }

    pub fn gossip_rounds(&self) -> u64 {
        self.gossip_rounds
    }

    /// `χ` including the averaging overhead.
    pub fn chi_with_gossip(&self) -> f64 {
        self.chi() + self.gossip_reals_per_node()
    }

    pub fn absorb(&mut self, other: &ComplexityLedger) {
        self.reals_sent += other.reals_sent;
        self.mults += other.mults;
        self.gossip_reals += other.gossip_reals;
        self.gossip_rounds += other.gossip_rounds;
    }
}

/// Pairwise gossip averaging parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GossipAvgConfig {
    /// Target relative precision of every node's average.
    pub epsilon: f64,
    /// Round cap; derived from `n` and `epsilon` when `None`.
    pub max_rounds: Option<usize>,
}

impl Default for GossipAvgConfig {
    fn default() -> Self {
        GossipAvgConfig {
            epsilon: 1e-6,
            max_rounds: None,
        }
    }
}

impl GossipAvgConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        Ok(GossipAvgConfig {
            epsilon,
            max_rounds: None,
        })
    }

    pub fn round_cap(&self, n: usize) -> usize {
        self.max_rounds
            .unwrap_or_else(|| (6.0 * (n as f64 / self.epsilon).log2()).ceil() as usize + 100)
    }
}

/// Stopping scale of one averaged component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scale {
    /// `|mean|` of the component itself.
    Mean,
    /// `sqrt(|mean_a| · |mean_b|)` of two other components.
    Geometric(usize, usize),
    /// A scale supplied by the caller.
    Fixed(f64),
}

/// Outcome of one gossip-averaging run over `k`-component records.
#[derive(Debug, Clone, PartialEq)]
pub struct GossipOutcome {
    /// Node-major per-node averages, `n * k` values.
    pub values: Vec<f64>,
    pub rounds: usize,
}

/// Averages node-major records of `k` reals by repeated random disjoint
/// pairings until every component is within `epsilon * scale` of its true
/// mean at every node.
///
/// The true mean is used only by the stopping check.
pub fn gossip_average_records(
    mut values: Vec<f64>,
    k: usize,
    scales: &[Scale],
    cfg: &GossipAvgConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<GossipOutcome> {
    assert!(k >= 1 && values.len().is_multiple_of(k) && scales.len() == k);
    let n = values.len() / k;
    if n < 2 {
        return Err(Error::InvalidInput(
            "gossip averaging needs at least 2 nodes".into(),
        ));
    }
    let mut means = vec![0.0; k];
    for rec in values.chunks_exact(k) {
        for (m, v) in means.iter_mut().zip(rec) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let tol: Vec<f64> = scales
        .iter()
        .enumerate()
        .map(|(c, s)| {
            let scale = match *s {
                Scale::Mean => means[c].abs(),
                Scale::Geometric(a, b) => (means[a].abs() * means[b].abs()).sqrt(),
                Scale::Fixed(v) => v.abs(),
            };
            cfg.epsilon * scale
        })
        .collect();
    let done = |v: &[f64]| {
        v.chunks_exact(k).all(|rec| {
            rec.iter()
                .zip(&means)
                .zip(&tol)
                .all(|((x, m), t)| (x - m).abs() <= *t)
        })
    };

    let cap = cfg.round_cap(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rounds = 0;
    while !done(&values) {
        if rounds == cap {
            ledger.charge_gossip((rounds * (n / 2) * 2 * k) as u64, rounds as u64);
            return Err(Error::MaxRoundsExceeded { rounds });
        }
        order.shuffle(rng);
        for pair in order.chunks_exact(2) {
            let (a, b) = (pair[0] * k, pair[1] * k);
            for c in 0..k {
                let avg = 0.5 * (values[a + c] + values[b + c]);
                values[a + c] = avg;
                values[b + c] = avg;
            }
        }
        rounds += 1;
    }
    ledger.charge_gossip((rounds * (n / 2) * 2 * k) as u64, rounds as u64);
    Ok(GossipOutcome { values, rounds })
}

/// Averages one real per node; stops at `epsilon * |mean|`.
pub fn gossip_average(
    values: &[f64],
    cfg: &GossipAvgConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<GossipOutcome> {
    gossip_average_records(values.to_vec(), 1, &[Scale::Mean], cfg, rng, ledger)
}

/// Per-node estimates of `‖x‖` obtained by averaging the squares.
pub fn distributed_norm_nodes(
    state: &NetworkState,
    cfg: &GossipAvgConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<Vec<f64>> {
    let sq: Vec<f64> = state.values().iter().map(|v| v * v).collect();
    let n = sq.len() as f64;
    let out = gossip_average(&sq, cfg, rng, ledger)?;
    Ok(out.values.into_iter().map(|a| (n * a).sqrt()).collect())
}

/// `‖x‖` as estimated at node 0.
pub fn distributed_norm(
    state: &NetworkState,
    cfg: &GossipAvgConfig,
    rng: &mut Rng,
    ledger: &mut ComplexityLedger,
) -> Result<f64> {
    Ok(distributed_norm_nodes(state, cfg, rng, ledger)?[0])
}

/// One synchronous round `x_i <- Σ_j S_ij x_j`.
pub fn spmv_round(
    state: &NetworkState,
    s: &SparseSample,
    ledger: &mut ComplexityLedger,
) -> Result<NetworkState> {
    if s.n() != state.n() {
        return Err(Error::DimensionMismatch {
            expected: state.n(),
            got: s.n(),
        });
    }
    let x = state.values();
    let mut out = vec![0.0; x.len()];
    for (i, yi) in out.iter_mut().enumerate() {
        let (c, v) = s.row(i);
        let acc: f64 = c.iter().zip(v).map(|(&j, &a)| a * x[j as usize]).sum();
        if !acc.is_finite() {
            return Err(Error::NonFiniteValue {
                node: i,
                round: state.round() + 1,
            });
        }
        *yi = acc;
    }
    ledger.charge_spmv(s.nnz(), 1);
    Ok(NetworkState::with_round(out, state.round() + 1))
}

/// Applies `S` to `r` vectors at once; each message carries `r` reals.
pub fn spmv_block(
    block: &[Vec<f64>],
    s: &SparseSample,
    round: usize,
    ledger: &mut ComplexityLedger,
) -> Result<Vec<Vec<f64>>> {
    let n = s.n();
    let mut out = vec![vec![0.0; n]; block.len()];
    for (x, y) in block.iter().zip(out.iter_mut()) {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = s.row(i);
            let acc: f64 = c.iter().zip(v).map(|(&j, &a)| a * x[j as usize]).sum();
            if !acc.is_finite() {
                return Err(Error::NonFiniteValue { node: i, round });
            }
            *yi = acc;
        }
    }
    ledger.charge_spmv(s.nnz(), block.len());
    Ok(out)
}

/// How network-wide sums are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    /// Every node receives the exact mean at no communication cost.
    Exact,
    /// Pairwise gossip averaging; each node ends with its own estimate.
    Gossip(GossipAvgConfig),
}

impl Default for Reduction {
    fn default() -> Self {
        Reduction::Gossip(GossipAvgConfig::default())
    }
}

impl Reduction {
    /// Per-node averages of node-major `k`-component records.
    pub fn averages(
        &self,
        records: Vec<f64>,
        k: usize,
        scales: &[Scale],
        rng: &mut Rng,
        ledger: &mut ComplexityLedger,
    ) -> Result<Vec<f64>> {
        match self {
            Reduction::Exact => {
                let n = records.len() / k;
                let mut means = vec![0.0; k];
                for rec in records.chunks_exact(k) {
                    for (m, v) in means.iter_mut().zip(rec) {
                        *m += v;
                    }
                }
                means.iter_mut().for_each(|m| *m /= n as f64);
                Ok(means.repeat(n))
            }
            Reduction::Gossip(cfg) => {
                Ok(gossip_average_records(records, k, scales, cfg, rng, ledger)?.values)
            }
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Reduction::Exact => 0.0,
            Reduction::Gossip(cfg) => cfg.epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn constant_values_need_no_rounds() {
        let mut ledger = ComplexityLedger::new(5);
        let out = gossip_average(
            &[3.0; 5],
            &GossipAvgConfig::default(),
            &mut SeedStream::new(1).rng(),
            &mut ledger,
        )
        .unwrap();
        assert_eq!(out.rounds, 0);
        assert_eq!(out.values, vec![3.0; 5]);
        assert_eq!(ledger.gossip_reals_per_node(), 0.0);
    }

    #[test]
    fn two_nodes_meet_in_one_round() {
        let mut ledger = ComplexityLedger::new(2);
        let out = gossip_average(
            &[0.0, 2.0],
            &GossipAvgConfig::default(),
            &mut SeedStream::new(1).rng(),
            &mut ledger,
        )
        .unwrap();
        assert_eq!(out.rounds, 1);
        assert_eq!(out.values, vec![1.0, 1.0]);
        assert_eq!(ledger.gossip_reals_per_node(), 1.0);
    }

    #[test]
    fn round_cap_is_reported() {
        let cfg = GossipAvgConfig {
            epsilon: 1e-6,
            max_rounds: Some(1),
        };
        let vals: Vec<f64> = (0..16).map(|i| i as f64 + 1.0).collect();
        let mut ledger = ComplexityLedger::new(16);
        let r = gossip_average(&vals, &cfg, &mut SeedStream::new(5).rng(), &mut ledger);
        assert_eq!(r, Err(Error::MaxRoundsExceeded { rounds: 1 }));
    }

    #[test]
    fn epsilon_is_validated() {
        assert!(GossipAvgConfig::new(0.0).is_err());
        assert!(GossipAvgConfig::new(1.0).is_err());
        assert!(GossipAvgConfig::new(0.5).is_ok());
    }

    #[test]
    fn exact_reduction_broadcasts_means() {
        let mut ledger = ComplexityLedger::new(3);
        let out = Reduction::Exact
            .averages(
                vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0],
                2,
                &[Scale::Mean, Scale::Mean],
                &mut SeedStream::new(0).rng(),
                &mut ledger,
            )
            .unwrap();
        assert_eq!(out, vec![2.0, 20.0, 2.0, 20.0, 2.0, 20.0]);
    }
}
