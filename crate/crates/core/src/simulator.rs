//! Repeated first-price auctions against a stationary environment.
//!
//! Regret is pseudo-regret: round `t` costs `u* - U_{v,F}(B_t)` whatever the
//! realized draws. Within one trial index every strategy faces the same
//! `(V_t, M_t)` sequence, drawn value first, then maximal bid, one uniform
//! each.

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::distributions::DistModel;
use crate::format::fmt12;
use crate::oracle::{self, Bid, OptimalBid, OracleError, DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL};
use crate::rng::{self, StreamRng, ENV_STREAM};
use crate::strategies::{Observation, Strategy, StrategyContext, StrategyError, StrategySpec};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("invalid simulation setup: {0}")]
    Invalid(String),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct AuctionEnv {
    pub value_dist: DistModel,
    /// Mean of `value_dist`.
    pub v: f64,
    pub maxbid_dist: DistModel,
    /// Whether `M_t` is disclosed after every round.
    pub reveal_m: bool,
    pub optimal: OptimalBid,
}

impl AuctionEnv {
    pub fn new(value_dist: DistModel, maxbid_dist: DistModel, reveal_m: bool) -> Result<Self, SimError> {
        let v = value_dist.mean();
        let optimal = oracle::optimal_bid(v, &maxbid_dist, DEFAULT_ORACLE_GRID, DEFAULT_TIE_TOL)?;
        Ok(AuctionEnv {
            value_dist,
            v,
            maxbid_dist,
            reveal_m,
            optimal,
        })
    }

    /// Bernoulli values with mean `v`.
    pub fn bernoulli(v: f64, maxbid_dist: DistModel, reveal_m: bool) -> Result<Self, SimError> {
        let values = DistModel::bernoulli(v).map_err(|e| SimError::Invalid(e.to_string()))?;
        Self::new(values, maxbid_dist, reveal_m)
    }

    pub fn utility(&self, b: Bid) -> f64 {
        oracle::utility(self.v, &self.maxbid_dist, b)
    }

    pub fn inst_regret(&self, b: Bid) -> f64 {
        self.optimal.u_star - self.utility(b)
    }

    fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        let v = self.value_dist.sample(rng);
        let m = self.maxbid_dist.sample(rng);
        (v, m)
    }

    /// The `(V_t, M_t)` sequence for one trial.
    pub fn draw_sequence(&self, horizon: usize, seed: u64) -> EnvDraws {
        let mut rng = rng::stream(seed, &[ENV_STREAM]);
        let (values, maxbids) = (0..horizon).map(|_| self.draw(&mut rng)).unzip();
        EnvDraws { values, maxbids }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvDraws {
    pub values: Vec<f64>,
    pub maxbids: Vec<f64>,
}

impl EnvDraws {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub bid: Bid,
    pub m: f64,
    pub won: bool,
    pub value_observed: Option<f64>,
    pub inst_regret: f64,
    /// Realized reward `(V_t - B_t) 1{won}`; diagnostics only.
    pub reward: f64,
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub strategy: String,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
}

impl TrialTrace {
    pub fn cum_regret(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cum_regret)
    }

    pub fn wins(&self) -> usize {
        self.steps.iter().filter(|s| s.won).count()
    }
}

fn play(
    env: &AuctionEnv,
    strategy: &mut Strategy,
    draws: &EnvDraws,
    mut on_step: impl FnMut(&TraceStep),
) -> Result<(), SimError> {
    let mut cum = 0.0;
    for (i, (&value, &m)) in draws.values.iter().zip(&draws.maxbids).enumerate() {
        let t = i + 1;
        let bid = strategy.next_bid();
        let won = m <= bid;
        let obs = Observation {
            round: t,
            won,
            max_rival_bid: env.reveal_m.then_some(m),
            value: won.then_some(value),
        };
        strategy.observe(&obs)?;
        let inst_regret = env.inst_regret(bid);
        cum += inst_regret;
        on_step(&TraceStep {
            t,
            bid,
            m,
            won,
            value_observed: obs.value,
            inst_regret,
            reward: if won { value - bid } else { 0.0 },
            cum_regret: cum,
        });
    }
    Ok(())
}

/// Plays `strategy` (fresh) against a pre-drawn sequence.
pub fn run_trial_on(
    env: &AuctionEnv,
    strategy: &mut Strategy,
    draws: &EnvDraws,
    seed: u64,
) -> Result<TrialTrace, SimError> {
    let mut steps = Vec::with_capacity(draws.len());
    play(env, strategy, draws, |s| steps.push(*s))?;
    Ok(TrialTrace {
        strategy: strategy.spec().to_string(),
        seed,
        steps,
    })
}

/// Plays `horizon` rounds with environment draws from `seed`.
pub fn run_trial(env: &AuctionEnv, strategy: &mut Strategy, horizon: usize, seed: u64) -> Result<TrialTrace, SimError> {
    let draws = env.draw_sequence(horizon, seed);
    run_trial_on(env, strategy, &draws, seed)
}

/// Which rounds to report.
#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoints {
    Log(usize),
    Explicit(Vec<usize>),
}

impl Default for Checkpoints {
    fn default() -> Self {
        Checkpoints::Log(100)
    }
}

impl std::str::FromStr for Checkpoints {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::Invalid(format!("checkpoints must be `log:N` or a list of rounds, got `{s}`"));
        if let Some(n) = s.trim().strip_prefix("log:") {
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            return Ok(Checkpoints::Log(n));
        }
        let pts = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        Ok(Checkpoints::Explicit(pts))
    }
}

impl Checkpoints {
    /// Sorted, deduplicated rounds in `[1, horizon]`.
    pub fn resolve(&self, horizon: usize) -> Result<Vec<usize>, SimError> {
        match self {
            Checkpoints::Log(n) => Ok(log_checkpoints(horizon, *n)),
            Checkpoints::Explicit(pts) => {
                let mut pts = pts.clone();
                pts.sort_unstable();
                pts.dedup();
                if pts.is_empty() || pts[0] == 0 || *pts.last().unwrap() > horizon {
                    return Err(SimError::Invalid(format!("checkpoints must lie in [1, {horizon}]")));
                }
                Ok(pts)
            }
        }
    }
}

/// `n` strictly increasing, roughly log-spaced rounds from 1 to `horizon`.
pub fn log_checkpoints(horizon: usize, n: usize) -> Vec<usize> {
    if horizon == 0 || n == 0 {
        return Vec::new();
    }
    if n >= horizon {
        return (1..=horizon).collect();
    }
    if n == 1 {
        return vec![horizon];
    }
    let log_t = (horizon as f64).ln();
    let mut out: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let x = (log_t * i as f64 / (n - 1) as f64).exp().round() as usize;
        let floor = out.last().map_or(1, |p| p + 1);
        let ceil = horizon - (n - 1 - i);
        out.push(x.max(floor).min(ceil));
    }
    out
}

/// Per-trial outcome at the checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub strategy: usize,
    pub trial: usize,
    pub cum_regret: Vec<f64>,
    pub cum_wins: Vec<usize>,
    /// Fraction of won auctions in rounds `t > T / 2`.
    pub late_win_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: String,
    pub t: usize,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretSummary {
    pub strategies: Vec<String>,
    pub checkpoints: Vec<usize>,
    /// Rows ordered by strategy, then checkpoint.
    pub rows: Vec<SummaryRow>,
}

impl RegretSummary {
    pub fn row(&self, strategy: &str, t: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.t == t)
    }

    /// Mean cumulative regret at the last checkpoint.
    pub fn final_mean(&self, strategy: &str) -> Option<f64> {
        let t = *self.checkpoints.last()?;
        self.row(strategy, t).map(|r| r.mean)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "t", "mean_regret", "q25_regret", "q75_regret", "trials"])?;
        for r in &self.rows {
            w.write_record([
                r.strategy.clone(),
                r.t.to_string(),
                fmt12(r.mean),
                fmt12(r.q25),
                fmt12(r.q75),
                r.trials.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub summary: RegretSummary,
    /// Ordered by trial, then strategy.
    pub records: Vec<TrialRecord>,
}

impl MonteCarloResult {
    pub fn write_raw_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "trial", "t", "cum_regret"])?;
        let mut records: Vec<&TrialRecord> = self.records.iter().collect();
        records.sort_by_key(|r| (r.strategy, r.trial));
        for r in records {
            let name = &self.summary.strategies[r.strategy];
            for (t, reg) in self.summary.checkpoints.iter().zip(&r.cum_regret) {
                w.write_record([name.clone(), r.trial.to_string(), t.to_string(), fmt12(*reg)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn records_for(&self, strategy: usize) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.strategy == strategy)
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub horizon: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub checkpoints: Vec<usize>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// Seed of the environment draws of trial `trial`.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    rng::derive_seed(base_seed, &[trial as u64])
}

/// Seed of strategy `strategy` in trial `trial`.
pub fn strategy_seed(base_seed: u64, strategy: usize, trial: usize) -> u64 {
    rng::derive_seed(base_seed, &[strategy as u64, trial as u64])
}

/// Runs `f` inside a dedicated rayon pool of `n` threads.
pub fn with_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> Result<R, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map_err(|e| SimError::Invalid(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn run_monte_carlo(
    env: &AuctionEnv,
    specs: &[StrategySpec],
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloResult, SimError> {
    if cfg.horizon == 0 || cfg.trials == 0 || specs.is_empty() {
        return Err(SimError::Invalid("need horizon >= 1, trials >= 1 and a strategy".into()));
    }
    let checkpoints = cfg.checkpoints.clone();
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 || *checkpoints.last().unwrap() > cfg.horizon {
        return Err(SimError::Invalid(format!("checkpoints must be increasing within [1, {}]", cfg.horizon)));
    }

    let base_ctx = StrategyContext::new(
        specs.iter().any(|s| s.needs_known_f()).then_some(&env.maxbid_dist),
        cfg.horizon,
        env.reveal_m,
        0,
    );
    for spec in specs {
        Strategy::new(spec, &base_ctx)?;
    }

    let run_one_trial = |trial: usize| -> Result<Vec<TrialRecord>, SimError> {
        let draws = env.draw_sequence(cfg.horizon, trial_seed(cfg.base_seed, trial));
        let half = cfg.horizon / 2;
        let mut out = Vec::with_capacity(specs.len());
        for (s, spec) in specs.iter().enumerate() {
            let ctx = StrategyContext {
                seed: strategy_seed(cfg.base_seed, s, trial),
                ..base_ctx.clone()
            };
            let mut strategy = Strategy::new(spec, &ctx)?;
            let mut cum_regret = Vec::with_capacity(checkpoints.len());
            let mut cum_wins = Vec::with_capacity(checkpoints.len());
            let mut wins = 0usize;
            let mut late_wins = 0usize;
            let mut next = 0usize;
            play(env, &mut strategy, &draws, |step| {
                if step.won {
                    wins += 1;
                    if step.t > half {
                        late_wins += 1;
                    }
                }
                if next < checkpoints.len() && step.t == checkpoints[next] {
                    cum_regret.push(step.cum_regret);
                    cum_wins.push(wins);
                    next += 1;
                }
            })?;
            out.push(TrialRecord {
                strategy: s,
                trial,
                cum_regret,
                cum_wins,
                late_win_rate: late_wins as f64 / (cfg.horizon - half) as f64,
            });
        }
        Ok(out)
    };

    let collect = || -> Result<Vec<Vec<TrialRecord>>, SimError> {
        (0..cfg.trials).into_par_iter().map(run_one_trial).collect()
    };
    let per_trial = match cfg.threads {
        Some(n) => with_threads(n, collect)??,
        None => collect()?,
    };
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();

    let names: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (s, name) in names.iter().enumerate() {
        for (c, &t) in checkpoints.iter().enumerate() {
            let mut vals: Vec<f64> = records.iter().filter(|r| r.strategy == s).map(|r| r.cum_regret[c]).collect();
            vals.sort_by(f64::total_cmp);
            rows.push(SummaryRow {
                strategy: name.clone(),
                t,
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                q25: quantile_sorted(&vals, 0.25),
                q75: quantile_sorted(&vals, 0.75),
                trials: vals.len(),
            });
        }
    }
    Ok(MonteCarloResult {
        summary: RegretSummary {
            strategies: names,
            checkpoints,
            rows,
        },
        records,
    })
}
