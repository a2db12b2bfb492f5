//! Seeded randomness shared by the RAND policy and instance sampling.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// SplitMix64 stream seeded directly with `seed` (no seed scrambling).
pub fn splitmix(seed: u64) -> SplitMix64 {
    SplitMix64::from_seed(seed.to_le_bytes())
}

/// In-place Fisher-Yates shuffle from the last index down, drawing the swap
/// index as `next() mod (i + 1)`.
pub fn shuffle<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Folds `parts` into `base`, one SplitMix64 step per part.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(base, |acc, &part| splitmix(acc ^ part).next_u64())
}
