//! Seeded random streams.
//!
//! Every random draw in the crate derives from a `u64` seed; distinct stages
//! of one run use distinct ChaCha streams of the same key so that changing
//! one stage's draw count never shifts another's.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Portfolio sample used by VaR and the baseline estimators.
pub const PORTFOLIO_STREAM: u64 = 0;
/// Metropolis-Hastings chain.
pub const CHAIN_STREAM: u64 = 1;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
