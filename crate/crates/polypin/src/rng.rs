//! Deterministic seeding: one master seed, one ChaCha8 stream per sample.
//!
//! Sample `i` always sees the same stream for a given master seed, no matter
//! how many samples run or in what order, so parallel runs are reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derived seed for sample `index` under `master`.
pub fn stream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1)))
}

/// Per-sample generator.
pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, index))
}
