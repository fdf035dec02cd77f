//! Seed derivation and the uniform stream used by generators and window samplers.
//!
//! All randomness comes from ChaCha8 seeded through [`ChaCha8Rng::seed_from_u64`],
//! which is portable and stable across platforms. Uniform reals are formed from the
//! top 53 bits of `next_u64`, so the stream does not depend on `rand`'s float sampling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of stream `index` from a parent seed:
/// `finalize(seed ^ index * 0x9E3779B97F4A7C15)`.
#[inline]
pub fn mix(seed: u64, index: u64) -> u64 {
    finalize(seed ^ index.wrapping_mul(GOLDEN))
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
