//! Seed derivation and lattice hashing.
//!
//! Everything random in the crate is a pure function of a 64-bit seed. Child
//! seeds are derived with splitmix64 so that streams for different call
//! indices (or purposes) never alias.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `seed`. Distinct indices give independent seeds.
#[inline]
pub fn split_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hash of an integer lattice point to a value in [-1, 1].
#[inline]
pub fn lattice_value(seed: u64, ix: i64, iy: i64) -> f64 {
    let mut h = splitmix64(seed ^ (ix as u64).wrapping_mul(0x85EB_CA77_C2B2_AE63));
    h = splitmix64(h ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
    // 53 high bits -> [0, 1)
    let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
    unit * 2.0 - 1.0
}
