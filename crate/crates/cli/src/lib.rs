//! The `fpa` command line: simulations, oracle queries, numerical checks and
//! bid-log ingestion.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fpa_core::concentration::{self, CheckResult, Verdict};
use fpa_core::distributions::parse_dist_spec;
use fpa_core::format::fmt12;
use fpa_core::ingest;
use fpa_core::oracle::{self, make_two_max_instance, OracleError};
use fpa_core::rng;
use fpa_core::simulator::{run_monte_carlo, MonteCarloConfig, SimError};
use fpa_core::strategies::StrategyError;
use fpa_core::DistModel;

use crate::config::Experiment;

#[derive(Debug, Parser)]
#[command(name = "fpa", version, about = "First-price auction bandit experiments")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte-Carlo regret experiment from a JSON config.
    Simulate(SimulateArgs),
    /// Optimal bid and regularity constants for one instance.
    Oracle(OracleArgs),
    /// Numerical checks of optimal-bid structure and concentration bounds.
    Check(CheckArgs),
    /// Filter and normalize a raw bid log into an empirical distribution file.
    Ingest(IngestArgs),
    /// Draw synthetic bids from a distribution, one per line.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Aggregate CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    /// Override the number of trials.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub value: f64,
    #[arg(long, default_value_t = oracle::DEFAULT_ORACLE_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = oracle::DEFAULT_TIE_TOL)]
    pub tol: f64,
    /// Half-width of the window for the regularity constants.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemmas,
    Concentration,
    All,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Monte-Carlo repetitions for coverage checks.
    #[arg(long, default_value_t = 10_000)]
    pub mc: usize,
    /// Value at which the structural checks run.
    #[arg(long, default_value_t = 0.5)]
    pub value: f64,
    /// Distribution specs to check instead of the bundled set.
    #[arg(long = "dist")]
    pub dists: Vec<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = ingest::DEFAULT_QUANTILE)]
    pub quantile: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub n: usize,
    /// Multiply every draw, e.g. to mimic prices in currency units.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// How a command failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
    Hopeless(anyhow::Error),
    ChecksFailed(usize),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::ChecksFailed(_) => 1,
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Hopeless(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e:#}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
            Failure::Hopeless(e) => write!(f, "{e:#}"),
            Failure::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

fn oracle_failure(e: OracleError) -> Failure {
    match e {
        OracleError::HopelessInstance { .. } => Failure::Hopeless(e.into()),
        OracleError::Dist(_) | OracleError::InvalidArgument(_) => Failure::Config(e.into()),
        _ => Failure::Runtime(e.into()),
    }
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Oracle(e) => oracle_failure(e),
        SimError::Strategy(StrategyError::NeedsRivalBids(_) | StrategyError::NeedsKnownF(_) | StrategyError::Spec { .. })
        | SimError::Invalid(_) => Failure::Config(e.into()),
        _ => Failure::Runtime(e.into()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(Failure::Runtime)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a, stdout),
        Command::Oracle(a) => oracle_cmd(a, stdout),
        Command::Check(a) => check(cli, a, stdout),
        Command::Ingest(a) => ingest_cmd(a, stdout),
        Command::Sample(a) => sample(cli, a, stdout),
    }
}

fn io_err(e: io::Error) -> Failure {
    Failure::Runtime(e.into())
}

fn simulate(cli: &Cli, a: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut exp = Experiment::load(&a.config).map_err(Failure::Config)?;
    if let Some(t) = a.trials {
        if t == 0 {
            return Err(Failure::Config(anyhow!("--trials must be at least 1")));
        }
        exp.trials = t;
    }
    let env = exp.env().map_err(sim_failure)?;
    let checkpoints = exp.checkpoints.resolve(exp.horizon).map_err(sim_failure)?;
    let cfg = MonteCarloConfig {
        horizon: exp.horizon,
        trials: exp.trials,
        base_seed: cli.seed,
        checkpoints,
        threads: cli.parallel,
    };
    let result = run_monte_carlo(&env, &exp.strategies, &cfg).map_err(sim_failure)?;

    match &a.out {
        Some(p) => result.summary.write_csv(create(p)?).map_err(sim_failure)?,
        None => result.summary.write_csv(&mut *stdout).map_err(sim_failure)?,
    }
    if let Some(p) = &a.raw {
        result.write_raw_csv(create(p)?).map_err(sim_failure)?;
    }
    let mut summary_out: Box<dyn Write> = if a.out.is_some() {
        Box::new(&mut *stdout)
    } else {
        Box::new(io::stderr())
    };
    for name in &result.summary.strategies {
        let mean = result.summary.final_mean(name).unwrap_or(f64::NAN);
        writeln!(
            summary_out,
            "{}: {name}: mean regret {} at t={} over {} trials",
            exp.name,
            fmt12(mean),
            exp.horizon,
            exp.trials
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn oracle_cmd(a: &OracleArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let dist = parse_dist_spec(&a.dist, Path::new(".")).map_err(|e| Failure::Config(e.into()))?;
    if !(0.0..=1.0).contains(&a.value) {
        return Err(Failure::Config(anyhow!("--value must lie in [0, 1]")));
    }
    if a.grid < 1000 {
        return Err(Failure::Config(anyhow!("--grid must be at least 1000")));
    }
    let opt = oracle::optimal_bid(a.value, &dist, a.grid, a.tol).map_err(oracle_failure)?;
    let reg = if dist.is_atomic() {
        None
    } else {
        oracle::regularity_constants(a.value, &dist, a.delta, 1000).ok()
    };
    let cell = |x: Option<f64>| x.map(fmt12).unwrap_or_default();
    writeln!(stdout, "b_star,q_star,u_star,c_f,big_c_f,lambda,delta,alpha").map_err(io_err)?;
    writeln!(
        stdout,
        "{},{},{},{},{},{},{},{}",
        fmt12(opt.b_star),
        fmt12(opt.q_star),
        fmt12(opt.u_star),
        cell(reg.map(|r| r.c_f)),
        cell(reg.map(|r| r.big_c_f)),
        cell(reg.map(|r| r.lambda)),
        cell(reg.map(|r| r.delta)),
        cell(reg.map(|r| r.alpha)),
    )
    .map_err(io_err)?;
    Ok(())
}

/// Distributions checked by default.
pub const CHECK_DISTS: [&str; 4] = ["uniform", "beta:1,6", "beta:2,3", "texp:2"];

const SUITE_GRID: usize = 10_000;
const SUITE_TOL: f64 = 1e-9;

fn check(cli: &Cli, a: &CheckArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut results: Vec<CheckResult> = Vec::new();
    if matches!(a.suite, Suite::Lemmas | Suite::All) {
        let mut instances: Vec<(String, f64, DistModel)> = Vec::new();
        let specs: Vec<String> = if a.dists.is_empty() {
            CHECK_DISTS.iter().map(|s| s.to_string()).collect()
        } else {
            a.dists.clone()
        };
        for s in specs {
            let d = parse_dist_spec(&s, Path::new(".")).map_err(|e| Failure::Config(e.into()))?;
            instances.push((s, a.value, d));
        }
        if a.dists.is_empty() {
            let (v, d) = make_two_max_instance();
            instances.push(("two-maximizer".into(), v, d));
        }
        for (label, v, dist) in instances {
            let checks = concentration::lemma_suite(v, &dist, SUITE_GRID, SUITE_TOL).map_err(oracle_failure)?;
            for mut c in checks {
                c.instance = format!("{label} {}", c.instance);
                results.push(c);
            }
        }
    }
    if matches!(a.suite, Suite::Concentration | Suite::All) {
        if a.mc == 0 {
            return Err(Failure::Config(anyhow!("--mc must be at least 1")));
        }
        let run = || concentration::concentration_suite(a.mc, cli.seed);
        let checks = match cli.parallel {
            Some(n) => fpa_core::simulator::with_threads(n, run).map_err(sim_failure)?,
            None => run(),
        }
        .map_err(|e| Failure::Runtime(e.into()))?;
        results.extend(checks);
    }

    writeln!(stdout, "name,instance,slack,verdict").map_err(io_err)?;
    for c in &results {
        writeln!(stdout, "{},{},{},{}", c.name, csv_field(&c.instance), fmt12(c.slack), csv_field(&c.verdict.to_string()))
            .map_err(io_err)?;
    }
    let failed = results.iter().filter(|c| c.verdict == Verdict::Fail).count();
    if failed > 0 {
        return Err(Failure::ChecksFailed(failed));
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn ingest_cmd(a: &IngestArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let log = ingest::read_bid_log(&a.input).map_err(|e| match e {
        ingest::IngestError::Io { .. } => Failure::Config(e.into()),
        _ => Failure::Runtime(e.into()),
    })?;
    let values = ingest::normalize(&log.raw_values, a.quantile).map_err(|e| match e {
        ingest::IngestError::InvalidQuantile(_) => Failure::Config(e.into()),
        _ => Failure::Runtime(e.into()),
    })?;
    ingest::write_empirical(create(&a.out)?, &values).map_err(io_err)?;
    writeln!(
        stdout,
        "kept {} of {} bids; wrote {}",
        values.len(),
        log.raw_values.len(),
        a.out.display()
    )
    .map_err(io_err)?;
    Ok(())
}

/// Stream tag for `fpa sample`.
const SAMPLE_STREAM: u64 = 0x7361_6d70;

fn sample(cli: &Cli, a: &SampleArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let dist = parse_dist_spec(&a.dist, Path::new(".")).map_err(|e| Failure::Config(e.into()))?;
    if a.scale.is_nan() || a.scale <= 0.0 {
        return Err(Failure::Config(anyhow!("--scale must be positive")));
    }
    let mut rng = rng::stream(cli.seed, &[SAMPLE_STREAM]);
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *stdout),
    };
    for _ in 0..a.n {
        writeln!(out, "{}", fmt12(dist.sample(&mut rng) * a.scale)).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
