//! Deterministic seed derivation for parallel campaigns.
//!
//! Every unit of work (a structure index in a screening campaign, a trial
//! index in a robustness probe) gets its own ChaCha stream seeded from a
//! splitmix64 lattice over `(master, index)`. Work items can then be
//! scheduled on any number of workers without coordination while producing
//! bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th output of the splitmix64 stream whose state is `master`.
///
/// Bijective in `index` for fixed `master`, so distinct work items never
/// share a seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix_finalize(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// ChaCha8 generator for work item `index` under `master`.
pub fn stream_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}
