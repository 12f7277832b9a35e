//! Named random sub-streams.
//!
//! Every consumer of randomness derives its own stream from the run seed and a
//! label, so adding a new consumer never perturbs existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// 64-bit FNV-1a.
pub fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for the sub-stream `label` of `seed`.
pub fn substream_seed(seed: u64, label: &str) -> u64 {
    splitmix(seed ^ label_hash(label))
}

pub fn substream(seed: u64, label: &str) -> Stream {
    Stream::seed_from_u64(substream_seed(seed, label))
}

/// Seed keyed by a label and an index (suite member, episode, cell...).
pub fn indexed_seed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix(substream_seed(seed, label) ^ splitmix(index))
}

pub fn indexed_substream(seed: u64, label: &str, index: u64) -> Stream {
    Stream::seed_from_u64(indexed_seed(seed, label, index))
}
