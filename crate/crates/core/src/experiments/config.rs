use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sparsifier::SampleMode;

/// Which experiment a configuration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    WarmstartTable,
    Tradeoff,
    Positioning,
    Diagnostics,
}

/// Where the target matrix comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    SyntheticSpiked,
    Mds,
    File(PathBuf),
}

/// How an estimated basis is scored against the true one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMetric {
    /// Best orthogonal alignment of the whole basis.
    #[default]
    Procrustes,
    /// Each column against its own eigenvector, up to sign.
    Columnwise,
}

impl ErrorMetric {
    /// Error of `u_hat` against `u`.
    pub fn eval(self, u: &[Vec<f64>], u_hat: &[Vec<f64>]) -> f64 {
        match self {
            ErrorMetric::Procrustes => super::procrustes_distance(u, u_hat),
            ErrorMetric::Columnwise => super::mds::columnwise_distance(u, u_hat),
        }
    }
}

/// Experiment parameters. Loaded from `key = value` text; every field has a
/// default so a file only lists what it changes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub n: usize,
    pub d: Option<f64>,
    pub d_list: Vec<f64>,
    pub t: Option<usize>,
    pub chi_list: Vec<f64>,
    /// Base seed for the matrix and for deriving per-trial streams.
    pub seed: u64,
    /// Monte Carlo repetitions.
    pub trials: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub l2: f64,
    pub noise_ratio: f64,
    pub mode: SampleMode,
    pub matrix_source: MatrixSource,
    pub output_path: Option<PathBuf>,
    pub t_cap: usize,
    pub meet_tol: f64,
    pub warm_start: bool,
    pub replicas: usize,
    pub pairs: usize,
    pub draws: usize,
    pub exact_reduction: bool,
    pub metric: ErrorMetric,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            n: 200,
            d: None,
            d_list: Vec::new(),
            t: None,
            chi_list: Vec::new(),
            seed: 0,
            trials: 10,
            delta: 0.1,
            epsilon: 1e-6,
            l2: 0.5,
            noise_ratio: 0.1,
            mode: SampleMode::SymmetricPair,
            matrix_source: MatrixSource::SyntheticSpiked,
            output_path: None,
            t_cap: 100,
            meet_tol: 1e-3,
            warm_start: false,
            replicas: 200,
            pairs: 1000,
            draws: 100,
            exact_reduction: false,
            metric: ErrorMetric::Procrustes,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| Error::Parse(format!("{key}: {e}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_num::<f64>(key, s.trim()))
        .collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse(format!(
            "{key}: expected a boolean, got {v:?}"
        ))),
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "experiment" => {
                self.experiment = Some(match v {
                    "warmstart_table" => ExperimentKind::WarmstartTable,
                    "tradeoff" => ExperimentKind::Tradeoff,
                    "positioning" => ExperimentKind::Positioning,
                    "diagnostics" => ExperimentKind::Diagnostics,
                    _ => return Err(Error::Parse(format!("unknown experiment {v:?}"))),
                })
            }
            "n" => self.n = parse_num("n", v)?,
            "d" => self.d = Some(parse_num("d", v)?),
            "d_list" => self.d_list = parse_list("d_list", v)?,
            "t" => self.t = Some(parse_num("t", v)?),
            "chi_list" => self.chi_list = parse_list("chi_list", v)?,
            "seed" => self.seed = parse_num("seed", v)?,
            "trials" | "seeds" => self.trials = parse_num(key.trim(), v)?,
            "delta" => self.delta = parse_num("delta", v)?,
            "epsilon" => self.epsilon = parse_num("epsilon", v)?,
            "l2" => self.l2 = parse_num("l2", v)?,
            "noise_ratio" => self.noise_ratio = parse_num("noise_ratio", v)?,
            "mode" => self.mode = v.parse()?,
            "matrix_source" => {
                self.matrix_source = match v {
                    "synthetic_spiked" => MatrixSource::SyntheticSpiked,
                    "mds" => MatrixSource::Mds,
                    _ => match v.strip_prefix("file:") {
                        Some(p) => MatrixSource::File(PathBuf::from(p.trim())),
                        None => return Err(Error::Parse(format!("unknown matrix_source {v:?}"))),
                    },
                }
            }
            "matrix_path" => self.matrix_source = MatrixSource::File(PathBuf::from(v)),
            "output_path" | "out" => self.output_path = Some(PathBuf::from(v)),
            "t_cap" => self.t_cap = parse_num("t_cap", v)?,
            "meet_tol" => self.meet_tol = parse_num("meet_tol", v)?,
            "warm_start" => self.warm_start = parse_bool("warm_start", v)?,
            "replicas" => self.replicas = parse_num("replicas", v)?,
            "pairs" => self.pairs = parse_num("pairs", v)?,
            "draws" => self.draws = parse_num("draws", v)?,
            "exact_reduction" => self.exact_reduction = parse_bool("exact_reduction", v)?,
            "metric" => {
                self.metric = match v {
                    "procrustes" => ErrorMetric::Procrustes,
                    "columnwise" => ErrorMetric::Columnwise,
                    _ => return Err(Error::Parse(format!("unknown metric {v:?}"))),
                }
            }
            other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every setting of a `key = value` text. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(k, v).map_err(|e| match e {
                Error::Parse(msg) => Error::Parse(format!("line {}: {msg}", lineno + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Checks ranges and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.n < 3 {
            return bad(format!("n must be at least 3, got {}", self.n));
        }
        let nf = self.n as f64;
        for &d in self.d.iter().chain(&self.d_list) {
            if !(d >= 1.0 && d <= nf) {
                return bad(format!("d = {d} must lie in [1, {}]", self.n));
            }
        }
        if self.chi_list.iter().any(|c| !(*c > 0.0)) {
            return bad("chi values must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.l2 > 0.0 && self.l2 < 1.0) {
            return bad(format!("l2 must lie in (0, 1), got {}", self.l2));
        }
        if self.t == Some(0) {
            return bad("t must be positive".into());
        }
        Ok(())
    }
}
