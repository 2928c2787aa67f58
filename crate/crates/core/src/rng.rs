//! Seeded random streams.
//!
//! Every stream is a xoshiro256++ generator seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Independent sub-streams, such as
//! one per statistics trajectory, take their seeds from a SplitMix64 sequence
//! started at the master seed.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

pub type Stream = Xoshiro256PlusPlus;

pub fn stream(seed: u64) -> Stream {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// `count` seeds derived from `master`.
pub fn derive_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut sm = SplitMix64::seed_from_u64(master);
    (0..count).map(|_| sm.next_u64()).collect()
}

/// Uniform draw in [0, 1).
pub fn unit(rng: &mut Stream) -> f64 {
    rng.random::<f64>()
}
