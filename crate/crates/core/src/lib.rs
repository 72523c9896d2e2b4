//! Stochastic first-price auction bandits.
//!
//! A bidder repeatedly faces a first-price auction: it wins round `t` when
//! its bid `B_t` is at least the highest rival bid `M_t` (ties win), then
//! observes and receives the item value `V_t` and pays `B_t`. This crate
//! provides
//!
//! - [`distributions`]: value and max-bid distributions on `[0, 1]`,
//! - [`oracle`]: exact utility, optimal bid and regularity constants,
//! - [`strategies`]: UCBid1, UCBid1+, O-UCBid1 and the baseline bidders,
//! - [`concentration`]: DKW-type bounds, coverage experiments, structural checks of the optimal bid,
//! - [`simulator`]: the pseudo-regret harness and Monte-Carlo aggregation,
//! - [`ingest`]: normalization of raw bid logs into empirical distributions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod distributions;
pub mod format;
pub mod ingest;
pub mod oracle;
pub mod rng;
pub mod simulator;
pub mod strategies;

pub use distributions::{DistError, DistModel};
pub use oracle::{Bid, OptimalBid, OracleError, RegularityReport};
pub use simulator::{AuctionEnv, RegretSummary, TrialTrace};
pub use strategies::{Observation, Strategy, StrategyContext, StrategyError, StrategySpec};


