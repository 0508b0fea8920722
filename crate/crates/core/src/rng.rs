//! Reproducible random streams.
//!
//! Every stochastic routine takes a caller-supplied generator. The crate-wide
//! generator is ChaCha20 (a counter-based stream cipher), so a `u64` seed maps
//! to the same stream on every platform. Per-trial seeds are derived from a
//! master seed with SplitMix64 finalization, which makes a trial's stream a pure
//! function of its coordinates in the experiment grid.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type ExperimentRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> ExperimentRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for repetition `rep` of grid cell `(s, o)`.
pub fn derive_seed(master: u64, s: usize, o: usize, rep: usize) -> u64 {
    let mut h = splitmix64(master);
    for part in [s as u64, o as u64, rep as u64] {
        h = splitmix64(h ^ part);
    }
    h
}
