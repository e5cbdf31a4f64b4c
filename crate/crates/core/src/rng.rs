//! Deterministic stream derivation.
//!
//! Every random consumer (chain, replicate, dataset regeneration) gets its
//! own ChaCha stream keyed by `(seed, tag, index)`, so results do not depend
//! on thread scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TAG_CHAIN: u64 = 0x01;
pub const TAG_REPLICATE: u64 = 0x02;
pub const TAG_DATASET: u64 = 0x03;
pub const TAG_INIT: u64 = 0x04;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix `(seed, tag, index)` into a single 64-bit stream key.
pub fn mix(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)) ^ index)
}

/// A reproducible generator for the given `(seed, tag, index)` triple.
pub fn substream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, tag, index))
}
