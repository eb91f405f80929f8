//! Seeding. Every stochastic routine takes an explicit 64-bit seed and owns a
//! ChaCha8 stream derived from it, so results are bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r` under master seed `master`:
/// `splitmix64(master ^ splitmix64(r))`.
pub fn replicate_seed(master: u64, replicate: u64) -> u64 {
    splitmix64(master ^ splitmix64(replicate))
}

/// Seed for an independent sub-stream labelled `stream` (e.g. one per grid
/// cell) of `master`.
pub fn stream_seed(master: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(master.wrapping_add(stream.wrapping_mul(GOLDEN))) ^ 0xD1B5_4A32_D192_ED03)
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
