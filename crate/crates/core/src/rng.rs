//! Seed handling shared by every stochastic operation.
//!
//! All randomness comes from ChaCha8 streams seeded with 64-bit values. A
//! seed is split into independent child seeds by SplitMix64 mixing, so
//! a replicate, fold or model can get its own stream without consuming
//! draws from its parent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 42;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `stream` under `seed`. Distinct streams give unrelated seeds.
pub fn split(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ mix64(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1)))
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
