//! Seed derivation and RNG streams.
//!
//! One experiment seed fans out into independent sub-streams (parameter
//! init, data generation, split shuffle, per-sample draws) through a
//! splitmix64 mix of (seed, stream tag). Every stream is a ChaCha8
//! generator, so results are reproducible bit-for-bit on one platform
//! regardless of draw interleaving elsewhere.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the documented sub-seed derivation.
pub mod stream {
    /// Parameter initialization.
    pub const INIT: u64 = 0x494e_4954;
    /// Dataset generation (fans out further per sample index).
    pub const DATA: u64 = 0x4441_5441;
    /// Train/val/test split shuffle (derived from the dataset seed).
    pub const SPLIT: u64 = 0x5350_4c54;
    /// Per-epoch batch shuffle (fans out further per epoch).
    pub const BATCH: u64 = 0x4241_5443;
}

/// splitmix64 finalizer, the standard 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a base seed and a stream tag. Composes:
/// `derive(derive(seed, DATA), i)` is the i-th sample's seed.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Deterministic generator for a derived stream.
pub fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_is_deterministic_and_tag_sensitive() {
        assert_eq!(derive(7, stream::INIT), derive(7, stream::INIT));
        assert_ne!(derive(7, stream::INIT), derive(7, stream::DATA));
        assert_ne!(derive(7, stream::INIT), derive(8, stream::INIT));
    }

    #[test]
    fn streams_reproduce() {
        use rand::RngCore;
        let mut a = rng_for(42, stream::DATA);
        let mut b = rng_for(42, stream::DATA);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
