//! Reproducible random streams.
//!
//! Every stochastic component draws from [`ChaCha8Rng`], a counter-based
//! generator. A child stream is identified by `(master seed, stream id)`:
//! the master seed fixes the key and the stream id selects an independent
//! ChaCha stream, so trajectory `k` of an ensemble is reproducible on its own.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` under `master_seed`.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Derives a 64-bit child seed from `(master_seed, index)` (SplitMix64 finaliser).
pub fn child_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
