//! Seed plumbing. Every random routine takes an explicit `u64` seed; parallel
//! callers derive per-task seeds with [`derive_seed`] so results do not depend
//! on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` of the family `tag` under `seed`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ tag.wrapping_mul(0xA24B_AED4_963E_E407)) ^ index)
}

pub mod tags {
    pub const BOOTSTRAP: u64 = 1;
    pub const REPLICATE: u64 = 2;
    pub const KMEANS: u64 = 3;
    pub const ERGM_P: u64 = 4;
    pub const DIMENSION: u64 = 5;
    pub const TRUTH: u64 = 6;
    pub const DATA: u64 = 7;
    pub const TABLE: u64 = 8;
}
