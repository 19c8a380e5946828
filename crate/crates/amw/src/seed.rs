//! Deterministic seed derivation.
//!
//! Every randomized task (bootstrap replicate, Monte Carlo replicate,
//! cross-validation split) receives its own child seed derived from the
//! master seed and the task index. Child streams never depend on thread
//! scheduling, so results are identical across thread counts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The RNG used throughout the crate.
pub type Rng = ChaCha12Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for task `index` under `master`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// RNG seeded for task `index` under `master`.
pub fn rng_for(master: u64, index: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(child_seed(master, index))
}
