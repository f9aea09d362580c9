//! Seed derivation.
//!
//! All derived seeds come from SplitMix64 (Steele, Lea & Flood 2014):
//!
//! ```text
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          z ^ (z >> 31)
//! derive_seed(master, i) = mix(master ^ mix(i + 0x9E3779B97F4A7C15))
//! ```
//!
//! Arithmetic is wrapping 64-bit. The function is stable across platforms
//! and releases, so replicate `i` of a given master seed always sees the
//! same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream tags used below the replicate seed.
pub mod stream {
    pub const LOSSES: u64 = 1;
    pub const GRAPHS: u64 = 2;
    pub const SETUP: u64 = 3;
    pub const ENVIRONMENT: u64 = 4;
    pub const LEARNER: u64 = 5;
}

pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64_mix(master ^ splitmix64_mix(index.wrapping_add(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
