//! Seed derivation.
//!
//! Every random stream in training is keyed by `(master seed, epoch, slot)`
//! so results never depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a list of words into one well-distributed seed.
pub fn derive(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5350_494b_4543_4c53, |acc, &p| splitmix(acc ^ splitmix(p)))
}

pub fn stream(parts: &[u64]) -> Rng {
    Rng::seed_from_u64(derive(parts))
}
