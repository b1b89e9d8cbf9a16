//! Deterministic random number generation.
//!
//! Every randomized operation in this crate takes an explicit `u64` seed and
//! builds its generator through these helpers, so results are reproducible
//! across runs, platforms, and thread counts. There is no hidden global RNG.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Seeded generator used throughout the crate.
pub fn seeded(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Derive an independent child seed for a parallel stream (bootstrap trial,
/// optimizer restart, ...) from a base seed and a stream index.
///
/// SplitMix64 finalizer; distinct `(seed, stream)` pairs map to well-separated
/// child seeds.
pub fn derive(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
