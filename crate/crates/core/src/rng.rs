//! Seed derivation and deterministic RNG construction.
//!
//! All randomized stages derive per-unit seeds from a master seed with
//! SplitMix64, so units (trajectories, epochs, episodes) are independent
//! streams and any subset can be regenerated without replaying the rest.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// The `index`-th output of a SplitMix64 sequence seeded with `master`
/// (one step per index).
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic stream RNG for a derived seed.
pub fn make_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
