//! Deterministic seed fan-out.
//!
//! One master seed drives a whole experiment. Each component derives its own
//! child seed from `(master, label)` through a fixed mixing scheme, so adding
//! or re-ordering components never perturbs the streams of the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the label bytes; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; decorrelates nearby inputs.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the child seed for `label` under `master`.
pub fn child_seed(master: u64, label: &str) -> u64 {
    splitmix64(master ^ fnv1a(label.as_bytes()))
}

/// Derive a child seed keyed by label and an index (e.g. one per user).
pub fn child_seed_indexed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(child_seed(master, label) ^ splitmix64(index.wrapping_add(1)))
}

/// The RNG used throughout the crate; seeded, portable, reproducible.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
