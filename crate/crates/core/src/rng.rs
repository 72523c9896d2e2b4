//! Deterministic random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a base seed and a path of
//! indices (for example `(trial)` for environment draws or
//! `(strategy, trial)` for a randomized bidder), so results never depend on
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tag for environment draws `(V_t, M_t)`.
pub const ENV_STREAM: u64 = 0x656e_7669;
/// Stream tag for a strategy's internal randomness.
pub const STRATEGY_STREAM: u64 = 0x7374_7261;
/// Stream tag for concentration experiments.
pub const COVERAGE_STREAM: u64 = 0x636f_7665;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `base` with each index in turn.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |acc, &i| splitmix64(acc ^ splitmix64(i)))
}

pub fn stream(base: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}
