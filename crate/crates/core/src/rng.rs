//! Seeded random streams.
//!
//! All randomness in the crate comes from ChaCha8 (`rand_chacha::ChaCha8Rng`)
//! seeded with [`SeedableRng::seed_from_u64`]. Independent consumers of the
//! same seed (a split, a weight init, a shuffle) take different ChaCha
//! streams, selected by a 64-bit FNV-1a hash of a textual tag, so that a run
//! is reproducible from `(seed, tag)` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// 64-bit FNV-1a over the tag bytes, with parts separated by `0x1f`.
pub fn stream_id(tags: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for (i, tag) in tags.iter().enumerate() {
        if i > 0 {
            h ^= 0x1f;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        for b in tag.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Generator for `seed` on the stream named by `tags`.
pub fn stream(seed: u64, tags: &[&str]) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tags));
    rng
}
