//! Seeded randomness.
//!
//! Every stochastic routine in the crate draws from [`SeededRng`], a ChaCha
//! stream cipher generator with 8 rounds seeded from a single `u64`. Child
//! streams are derived with [`derive_seed`] so that independent consumers
//! (graph sampling, signal sampling, initialization, shuffling) never share a
//! stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for a named stream of a parent seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Stream identifiers used throughout the crate.
pub mod streams {
    pub const GRAPH: u64 = 1;
    pub const SIGNALS: u64 = 2;
    pub const GROUND_TRUTH: u64 = 3;
    pub const INIT: u64 = 4;
    pub const SHUFFLE: u64 = 5;
    pub const POWER_ITERATION: u64 = 6;
    pub const TRIAL: u64 = 7;
}
