//! Seed expansion. Every trial `i` of a run seeded with `base` uses
//! `ChaCha20Rng::seed_from_u64(derive_seed(base, i))`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SessionRng = ChaCha20Rng;

/// splitmix64 of `base + (index + 1) * GOLDEN`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> SessionRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn trial_rng(base: u64, index: u64) -> SessionRng {
    rng_from_seed(derive_seed(base, index))
}
