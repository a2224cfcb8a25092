//! Deterministic derivation of independent RNG streams.
//!
//! Every stochastic operation in the crate draws from a [`ChaCha8Rng`] whose
//! seed is a pure function of a master seed plus a list of integer tags
//! (stage, generation, trial index, ...). Work items can therefore be
//! evaluated in any order, on any number of threads, without changing
//! results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; decorrelates consecutive tag values.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed and a tag path into a single stream seed.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &tag in tags {
        state = splitmix64(state ^ splitmix64(tag));
    }
    state
}

/// An RNG for the work item identified by `tags` under `master`.
pub fn derive_rng(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tags))
}

/// Tag namespaces, one per call site family, so distinct operations never
/// share a stream even when their remaining tags collide.
pub mod tag {
    pub const POPULATION_INIT: u64 = 1;
    pub const OFFSPRING: u64 = 2;
    pub const PERTURB_TRIAL: u64 = 3;
    pub const FAULT_TRIAL: u64 = 4;
    pub const CODEBOOK: u64 = 5;
    pub const BANK_CLASS: u64 = 6;
}
