//! Seeding.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a 64-bit
//! output counter-mode generator whose stream is stable across platforms and
//! crate versions. Per-trial streams are derived by mixing `(seed, index)`
//! through the SplitMix64 finalizer, so trial `k` of an experiment sees the
//! same numbers whether it runs first, last, or on another thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng64 = ChaCha8Rng;

/// Sub-stream tags used inside a trial.
pub mod tag {
    pub const ENV: u64 = 1;
    pub const EXPLORER: u64 = 2;
    pub const INIT: u64 = 3;
    pub const EVAL: u64 = 4;
    pub const EVAL_TIES: u64 = 5;
}

/// SplitMix64 output finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of stream `index` from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

pub fn stream(seed: u64, index: u64) -> Rng64 {
    Rng64::seed_from_u64(derive_seed(seed, index))
}

/// Seeds for the independent streams of one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSeeds {
    pub trial_seed: u64,
}

impl TrialSeeds {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self { trial_seed: derive_seed(seed, trial) }
    }

    pub fn rng(&self, tag: u64) -> Rng64 {
        stream(self.trial_seed, tag)
    }
}
