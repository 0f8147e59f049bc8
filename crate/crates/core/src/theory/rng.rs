//! Seeded randomness.
//!
//! Every generator is `ChaCha8Rng::seed_from_u64(seed)`. Independent streams
//! (per trial chunk, per sample, per grid cell) get their own seed from
//! [`derive_seed`], which mixes the parent seed and a stream index with the
//! SplitMix64 finalizer:
//!
//! ```text
//! derive_seed(parent, stream) = mix(parent ^ mix(stream + 0x9E3779B97F4A7C15))
//! mix(z) = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!          z ^= z >> 27; z *= 0x94D049BB133111EB; z ^ (z >> 31)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type AuditRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> AuditRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `stream` under `parent`.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    mix(parent ^ mix(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}
