//! Seeded random streams.
//!
//! Every stochastic component draws from its own ChaCha8 stream derived from a
//! master seed and a stream name, so adding draws in one component never shifts
//! the sequence seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator seeded directly from `seed`.
pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named substream of `master`.
pub fn substream(master: u64, name: &str) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(fnv1a(name.as_bytes()));
    rng
}

/// Derives a child seed, e.g. one per trial of a sweep.
pub fn child_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
