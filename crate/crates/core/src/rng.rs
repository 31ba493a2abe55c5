//! Deterministic RNG streams keyed by (seed, labels…).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mix a seed with a sequence of labels into a 64-bit stream key.
pub fn stream_key(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(splitmix(seed), |acc, &l| splitmix(acc ^ splitmix(l)))
}

pub fn stream(seed: u64, labels: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_key(seed, labels))
}

// Labels separating the independent uses of one master seed.
pub const LABEL_CHANNEL: u64 = 1;
pub const LABEL_MESSAGE: u64 = 2;
pub const LABEL_PLAN: u64 = 3;
