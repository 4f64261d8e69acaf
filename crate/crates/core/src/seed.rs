//! Seed derivation. Every random stream in the crate is keyed by a tuple of
//! integers mixed through SplitMix64, so results never depend on the order in
//! which independent pieces of work are executed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with a path of integer keys.
pub fn derive_seed(base: u64, keys: &[u64]) -> u64 {
    let mut h = splitmix64(base);
    for &k in keys {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

/// The generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

pub fn rng_from(base: u64, keys: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(base, keys))
}

/// Stream labels for the different consumers of randomness.
pub mod stream {
    pub const GRAPH: u64 = 1;
    pub const THETA: u64 = 2;
    pub const GIBBS: u64 = 3;
    pub const GAUSSIAN: u64 = 4;
    pub const FILLER: u64 = 5;
    pub const PLACEMENT: u64 = 6;
    pub const HAWKES: u64 = 7;
    pub const MAGNITUDE: u64 = 8;
    pub const BOOTSTRAP: u64 = 9;
    pub const PERMUTATION: u64 = 10;
}
