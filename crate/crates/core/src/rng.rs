//! Deterministic per-replica random streams.
//!
//! Replica `i` of an experiment seeded with `master` draws from
//! `ChaCha8Rng::seed_from_u64(mix64(master, i))`, so a trajectory depends only
//! on `(master, i)` and never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (Stafford variant 13).
#[inline]
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a stream index:
/// `avalanche(avalanche(master) + (index + 1) * GOLDEN_GAMMA)`.
#[inline]
pub fn mix64(master: u64, index: u64) -> u64 {
    avalanche(avalanche(master).wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replica_rng(master: u64, index: u64) -> SimRng {
    seeded(mix64(master, index))
}
