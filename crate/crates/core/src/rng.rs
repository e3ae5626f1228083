//! Seed plumbing. Every random draw in the crate comes from a ChaCha8
//! stream derived from one user seed, so runs replay bit-identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `index` of `seed`. Used to hand each trial or
/// worker its own generator without sharing state.
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Two-level substream: (experiment tag, trial).
pub fn trial_stream(seed: u64, tag: u32, trial: u32) -> SimRng {
    substream(seed, ((tag as u64) << 32) | trial as u64)
}
