//! Seed derivation.
//!
//! Every stochastic component receives its own seed derived from the master
//! seed and a textual tag (`"fold3/vqvae"`, ...). The tag is folded in with
//! FNV-1a and the result is passed through the splitmix64 finalizer, so
//! sibling tags never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Derives the seed for a named sub-component.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    splitmix64(splitmix64(master) ^ fnv1a(tag))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
