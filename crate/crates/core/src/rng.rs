//! Seed derivation. Every random stream in the crate is a ChaCha generator
//! keyed by a 64-bit seed derived from `(master, stream)` so that parallel
//! work items draw identical numbers regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for substream `stream` of `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(mix(master) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn stream_rng(master: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(master, stream))
}
