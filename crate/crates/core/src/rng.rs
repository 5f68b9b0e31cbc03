//! Seed derivation and the random stream type shared by every component.
//!
//! A run seed is split into independent child streams by label, so adding a
//! disruptor (or an agent) never shifts the draws of another component.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based stream. Cloning copies the stream position.
pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives the seed of child stream `(label, index)` from `root`.
///
/// `derive_seed(root, label, i) = splitmix64(splitmix64(root ^ fnv1a(label)) ^ i)`.
pub fn derive_seed(root: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ fnv1a(label)) ^ index)
}

pub fn derive_stream(root: u64, label: &str, index: u64) -> StreamRng {
    stream(derive_seed(root, label, index))
}
