//! Counter-based random streams.
//!
//! Every random draw in the simulator is a pure function of a key tuple
//! (seed, tick, cell, stream). Results do not depend on iteration order or
//! on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a key tuple into a single well-distributed 64-bit value.
#[inline]
pub fn hash_key(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Uniform draw in `[0, 1)` for the given key.
#[inline]
pub fn uniform(parts: &[u64]) -> f64 {
    (hash_key(parts) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw for the given key (Box-Muller on two sub-keys).
pub fn standard_normal(parts: &[u64]) -> f64 {
    let base = hash_key(parts);
    let u1 = ((splitmix64(base ^ 1) >> 11) as f64 + 1.0) * (1.0 / ((1u64 << 53) as f64 + 1.0));
    let u2 = (splitmix64(base ^ 2) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A seeded sequential generator for one keyed stream (e.g. one MPPI rollout).
pub fn stream(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(hash_key(parts))
}

/// Stream identifiers, so unrelated draws sharing (seed, tick, index) never collide.
pub mod streams {
    pub const SEMANTIC_FLIP: u64 = 1;
    pub const SEMANTIC_CLASS: u64 = 2;
    pub const ELEVATION: u64 = 3;
    pub const DETECT_MISS: u64 = 4;
    pub const FALSE_POSITIVE: u64 = 5;
    pub const FALSE_POSITIVE_BEARING: u64 = 6;
    pub const FALSE_POSITIVE_RANGE: u64 = 7;
    pub const ROLLOUT: u64 = 8;
    pub const CORPUS: u64 = 9;
}
