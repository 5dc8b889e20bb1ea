//! Named random streams derived from a single root seed.
//!
//! Each consumer draws from its own ChaCha stream, so adding or removing
//! draws in one consumer never shifts another consumer's sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// The per-round Bernoulli coin that starts a replay phase.
    ReplayCoin = 1,
    /// The replay index drawn once a replay starts.
    ReplayIndex = 2,
    /// Action sampling from `p_t`.
    Action = 3,
    /// Environment draws `(x_t, r_t)`.
    Environment = 4,
}

/// ChaCha words reserved per environment round; a round uses `2 * (1 + K)`.
const ENV_WORDS_PER_ROUND: u128 = 256;

pub fn stream(root_seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(which as u64);
    rng
}

/// Generator positioned at the block of the environment stream reserved for round `t`.
pub fn environment_round(root_seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = stream(root_seed, Stream::Environment);
    rng.set_word_pos(t as u128 * ENV_WORDS_PER_ROUND);
    rng
}
