//! Seeded, splittable random streams.
//!
//! Every stochastic entry point takes an explicit `u64` seed. Independent
//! consumers derive their own stream from `(seed, stream)` so results do not
//! depend on call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used inside the crate. Kept distinct so two consumers seeded
/// with the same user seed never share a stream.
pub mod stream {
    pub const SAMPLE: u64 = 1;
    pub const TWIN_MC: u64 = 2;
    pub const AAP: u64 = 3;
    pub const INIT: u64 = 10;
    pub const SHUFFLE: u64 = 11;
    pub const NOISE: u64 = 12;
    pub const INFERENCE: u64 = 20;
    pub const DATAGEN: u64 = 30;
    pub const RANDOM_MODEL: u64 = 40;
}

pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive a child seed, e.g. one per table cell or per worker shard.
pub fn split(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
