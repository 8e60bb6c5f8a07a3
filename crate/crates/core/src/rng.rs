//! Deterministic seed streams.
//!
//! Every random draw in the crate is addressed by `(master seed, stream, index)`
//! so results do not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream tags, so different consumers of one master seed never share draws.
pub mod stream {
    pub const PAIR_LEFT: u64 = 1;
    pub const PAIR_RIGHT: u64 = 2;
    pub const PAIR_MIX: u64 = 3;
    pub const POINT: u64 = 4;
    pub const CHECK: u64 = 5;
}
