//! Counter-based seeding.
//!
//! Every source of randomness in the crate is derived from
//! `(root seed, stream tag, counter)` through a splitmix64 mix, so any draw
//! can be reproduced without carrying RNG state around. Resuming a run only
//! needs the integer counters, and noise at step `t` of an episode never
//! depends on the actions taken before `t`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Two streams with different tags never collide in practice.
pub mod streams {
    pub const ENV_RESET: u64 = 0x01;
    pub const OBS_NOISE: u64 = 0x02;
    pub const EXPLORE: u64 = 0x03;
    pub const OPTIMIZER: u64 = 0x04;
    pub const EVAL: u64 = 0x05;
    pub const NET_INIT: u64 = 0x06;
    pub const CACHE: u64 = 0x07;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapses `(seed, stream, index)` into one well-mixed 64-bit value.
pub fn mix(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
}

/// A fresh generator for the given stream position.
pub fn rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, stream, index))
}
