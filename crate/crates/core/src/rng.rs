//! Seeded, portable random streams.
//!
//! Every random draw in the crate comes from ChaCha8 seeded with a `u64`.
//! Independent substreams (one per kernel, per repeat, ...) use ChaCha's
//! stream selector so generation order never affects the values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GENERATOR_NAME: &str = "chacha8";

/// Generator for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed, a purpose tag and an index.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = mix64(master);
    for b in tag.bytes() {
        h = mix64(h ^ u64::from(b));
    }
    mix64(h ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}
