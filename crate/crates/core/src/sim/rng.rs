//! Counter-based random streams.
//!
//! Every episode draws from its own ChaCha8 stream: the generator is keyed
//! by the run seed and the stream id is the 0-based episode index. An
//! episode's randomness therefore does not depend on how many draws earlier
//! episodes consumed, and serial and parallel replays agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type EpisodeRng = ChaCha8Rng;

pub fn episode_rng(seed: u64, episode: u64) -> EpisodeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode);
    rng
}

/// Stream reserved for draws that are not tied to an episode (instance
/// generation, Monte-Carlo checks).
pub fn auxiliary_rng(seed: u64) -> EpisodeRng {
    episode_rng(seed, u64::MAX)
}
