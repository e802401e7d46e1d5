//! Seeded randomness. Every stochastic path in the crate draws from a
//! ChaCha8 stream created here, so a (seed, config) pair pins the output.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable per-item sub-seed (splitmix64 finaliser over master ^ index), so
/// items can be generated independently in any order.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in [-0.1, 0.1], the initialisation used for all trainable
/// parameters.
pub fn init_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-0.1..0.1)).collect()
}
