//! Command-line entry point.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diagnostics::{absorbing_check, measure_contraction, measure_mixing, ChainSetup};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_eigenvalue, gossip_pca, random_start, trace_csv, warm_start, PcaConfig,
};
use crate::experiments::{
    build_matrix, run_positioning, run_tradeoff, run_warmstart_table, ErrorMetric,
    ExperimentConfig, MatrixSource, RunRecord,
};
use crate::gossip::{ComplexityLedger, GossipAvgConfig, Reduction};
use crate::linalg::spectral_oracle;
use crate::par::Executor;
use crate::rng::SeedStream;
use crate::sparsifier::{estimate_theta, SparsifyScheme};

const AFTER_HELP: &str = "\
Outputs:
  eigvec, eigval    JSON record {n, d, theta_hat, t, chi, err, lambda_hat, seed}
  warmstart-table   CSV d,tau,err,censored,trials,seed
  tradeoff          CSV chi,method,d,err,seed (crossover and slope on stderr)
  positioning       CSV chi,d,delta,seed (rank correlation on stderr)
  diagnose          key: value summary; --out writes CSV t,probe_gap

Settings are applied in order: built-in defaults, --profile, --config file,
then flags. GOSSIP_PCA_THREADS caps the worker pool; output does not depend
on it.

Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure.";

#[derive(Debug, Parser)]
#[command(name = "gossip-pca", version, about = "Decentralized leading-eigenvector estimation by random sparsification", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the leading eigenvector.
    Eigvec(CommonArgs),
    /// Estimate the leading eigenvalue.
    Eigval(CommonArgs),
    /// Meeting time and error of coupled trajectories for several d.
    WarmstartTable(CommonArgs),
    /// Error against communication budget for both estimators.
    Tradeoff(CommonArgs),
    /// Two-dimensional positioning from squared distances.
    Positioning(CommonArgs),
    /// Contraction, absorption and mixing checks of the chain.
    Diagnose(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    Desk,
    Paper,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Read the target matrix from a file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Write a per-round trace CSV (eigvec, eigval).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    /// Start from a warm start instead of a random vector (eigvec).
    #[arg(long)]
    warm_start: bool,
    /// Average exactly instead of by gossip.
    #[arg(long)]
    exact_reduction: bool,
    #[arg(long, value_enum)]
    profile: Option<Profile>,
}

impl CommonArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.d {
            cfg.d = Some(v);
        }
        if let Some(v) = self.t {
            cfg.t = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = &self.out {
            cfg.output_path = Some(v.clone());
        }
        if let Some(v) = &self.matrix {
            cfg.matrix_source = MatrixSource::File(v.clone());
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.l2 {
            cfg.l2 = v;
        }
        if self.warm_start {
            cfg.warm_start = true;
        }
        if self.exact_reduction {
            cfg.exact_reduction = true;
        }
        Ok(())
    }
}

fn base_config(command: &Command, profile: Profile) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    let paper = profile == Profile::Paper;
    match command {
        Command::WarmstartTable(_) => {
            cfg.n = 1000;
            cfg.l2 = 0.1;
            cfg.trials = 20;
        }
        Command::Tradeoff(_) => {
            cfg.matrix_source = MatrixSource::Mds;
            cfg.metric = ErrorMetric::Columnwise;
            cfg.trials = 4;
            if paper {
                cfg.n = 1000;
                cfg.d_list = vec![50.0, 500.0];
            }
        }
        Command::Positioning(_) => {
            cfg.matrix_source = MatrixSource::Mds;
            if paper {
                cfg.n = 1000;
                cfg.d = Some(50.0);
            }
        }
        Command::Diagnose(_) => cfg.n = 128,
        Command::Eigvec(_) | Command::Eigval(_) => {
            if paper {
                cfg.n = 1000;
            }
        }
    }
    cfg
}

fn reduction(cfg: &ExperimentConfig) -> Result<Reduction> {
    Ok(if cfg.exact_reduction {
        Reduction::Exact
    } else {
        Reduction::Gossip(GossipAvgConfig::new(cfg.epsilon)?)
    })
}

fn default_d(cfg: &ExperimentConfig) -> f64 {
    cfg.d.unwrap_or((cfg.n as f64 / 8.0).max(1.0))
}

/// Output of one subcommand.
struct Output {
    main: String,
    summary: String,
    trace: Option<String>,
}

fn run_single(cfg: &ExperimentConfig, eigenvalue: bool) -> Result<Output> {
    let root = SeedStream::new(cfg.seed);
    let m = build_matrix(cfg, root.child(0))?;
    let n = m.n();
    let spec = spectral_oracle(&m)?;
    let d = default_d(cfg).min(n as f64);
    let scheme = SparsifyScheme::new(n, d)?.with_mode(cfg.mode);
    let theta_hat = estimate_theta(&m, &scheme, 10, &mut root.child(1).rng());
    let t = cfg.t.unwrap_or(100);
    let pcfg = PcaConfig {
        reduction: reduction(cfg)?,
        trace: true,
        ..Default::default()
    };
    let mut rng = root.child(2).rng();
    let mut ledger = ComplexityLedger::new(n);
    let (record, trace) = if eigenvalue {
        let est = estimate_eigenvalue(&m, &scheme, t, &pcfg, &mut rng, &mut ledger)?;
        let lambda1 = spec.lambda();
        let record = RunRecord {
            n,
            d,
            theta_hat,
            t,
            chi: ledger.chi(),
            err: Some((est.lambda_hat - lambda1).abs() / lambda1),
            lambda_hat: Some(est.lambda_hat),
            seed: cfg.seed,
        };
        (record, None)
    } else {
        let x0 = if cfg.warm_start {
            warm_start(
                &m,
                &scheme,
                theta_hat,
                spec.l2(),
                &PcaConfig {
                    reduction: pcfg.reduction,
                    ..Default::default()
                },
                &mut rng,
                &mut ledger,
            )?
            .x
        } else {
            random_start(n, &mut rng)
        };
        let run = gossip_pca(&m, &scheme, &x0, t, &pcfg, &mut rng, &mut ledger)?;
        let est = run.estimate.with_reference(spec.u());
        let record = RunRecord {
            n,
            d,
            theta_hat,
            t,
            chi: ledger.chi(),
            err: est.err_vs_oracle,
            lambda_hat: None,
            seed: cfg.seed,
        };
        (record, Some(trace_csv(&run.trajectory.trace)))
    };
    let json = serde_json::to_string(&record).map_err(|e| Error::Io(e.to_string()))?;
    Ok(Output {
        main: json + "\n",
        summary: String::new(),
        trace,
    })
}

fn run_diagnose(cfg: &ExperimentConfig, exec: &Executor) -> Result<Output> {
    cfg.validate()?;
    let root = SeedStream::new(cfg.seed);
    let m = build_matrix(cfg, root.child(0))?;
    let n = m.n();
    let scheme = SparsifyScheme::new(n, default_d(cfg).min(n as f64))?.with_mode(cfg.mode);
    let setup = ChainSetup::new(m, scheme, 20, &mut root.child(1).rng())?;
    let c = measure_contraction(&setup, cfg.pairs, cfg.draws, root.child(2), exec);
    let a = absorbing_check(&setup, cfg.replicas, 100, root.child(3), exec);
    let mix = measure_mixing(
        &setup,
        cfg.t.unwrap_or(50),
        cfg.replicas,
        root.child(4),
        exec,
    );
    let mut text = format!(
        "n: {}\nd: {}\ntheta: {}\nl2: {}\nradius: {}\nrho_empirical: {}\nrho_bound: {}\npairs: {}\ndraws_per_pair: {}\nviolations: {}\nmax_pair_mean: {}\nabsorption_steps: {}\nabsorption_escapes: {}\nabsorption_max_distance: {}\n",
        n,
        setup.scheme.d(),
        setup.theta,
        setup.l2,
        setup.radius(),
        c.rho_empirical,
        c.rho_bound,
        c.pairs,
        c.draws_per_pair,
        c.violations,
        c.max_pair_mean,
        a.steps_total,
        a.escapes,
        a.max_distance
    );
    text.push_str(&mix.summary());
    let mut summary = String::new();
    if let Some(w) = &c.warning {
        summary = format!("warning: {w}\n");
    }
    if cfg.output_path.is_some() {
        // The curve goes to --out; the summary stays on stdout.
        return Ok(Output {
            main: mix.curve_csv(),
            summary: summary + &text,
            trace: None,
        });
    }
    Ok(Output {
        main: text,
        summary,
        trace: None,
    })
}

fn execute(cli: &Cli) -> Result<(ExperimentConfig, Output)> {
    let (Command::Eigvec(args)
    | Command::Eigval(args)
    | Command::WarmstartTable(args)
    | Command::Tradeoff(args)
    | Command::Positioning(args)
    | Command::Diagnose(args)) = &cli.command;
    let mut cfg = base_config(&cli.command, args.profile.unwrap_or(Profile::Desk));
    args.apply(&mut cfg)?;
    cfg.validate()?;
    let exec = Executor::from_env();
    let mut output = match &cli.command {
        Command::Eigvec(_) => run_single(&cfg, false)?,
        Command::Eigval(_) => run_single(&cfg, true)?,
        Command::WarmstartTable(_) => {
            let table = run_warmstart_table(&cfg, &exec)?;
            Output {
                main: table.csv(),
                summary: String::new(),
                trace: None,
            }
        }
        Command::Tradeoff(_) => {
            let report = run_tradeoff(&cfg, &exec)?;
            Output {
                main: report.csv(),
                summary: report.summary(),
                trace: None,
            }
        }
        Command::Positioning(_) => {
            let report = run_positioning(&cfg, &exec)?;
            Output {
                main: report.csv(),
                summary: report.summary(),
                trace: None,
            }
        }
        Command::Diagnose(_) => run_diagnose(&cfg, &exec)?,
    };
    if args.trace.is_none() {
        output.trace = None;
    }
    if let (Some(path), Some(trace)) = (&args.trace, &output.trace) {
        std::fs::write(path, trace).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok((cfg, output))
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = stdout.write_all(text.as_bytes());
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        1
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let result = execute(&cli).and_then(|(cfg, out)| {
        match &cfg.output_path {
            Some(path) => std::fs::write(path, &out.main)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(out.main.as_bytes())?,
        }
        if !out.summary.is_empty() {
            let target: &mut dyn Write =
                if cfg.output_path.is_some() && matches!(cli.command, Command::Diagnose(_)) {
                    stdout
                } else {
                    stderr
                };
            target.write_all(out.summary.as_bytes())?;
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
