//! Deterministic RNG stream derivation.
//!
//! Every trial/sample owns a stream derived from `(seed, path indices)`, so
//! results are identical for a given seed regardless of scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche for small structured inputs.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `(seed, path)` into a single stream key.
pub fn stream_key(seed: u64, path: &[u64]) -> u64 {
    let mut h = mix(seed ^ 0x9E37_79B9_7F4A_7C15);
    for &p in path {
        h = mix(h.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p));
    }
    h
}

/// RNG for the stream identified by `(seed, path)`.
pub fn stream_rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, path))
}
