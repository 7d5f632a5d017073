//! Seed derivation shared by every randomized component.
//!
//! Child seeds are a pure function of `(parent, index)`, so work split across
//! threads draws the same numbers no matter how it is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and an index.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn rng_from(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(parent: u64, index: u64) -> Rng {
    rng_from(derive_seed(parent, index))
}
