//! Seed derivation. Every random stream in a run is a pure function of the
//! run seed and a few integer coordinates, so no generator state is shared
//! between epochs or batches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub(crate) const STREAM_INIT: u64 = 0x1;
pub(crate) const STREAM_SHUFFLE: u64 = 0x2;
pub(crate) const STREAM_SELECT: u64 = 0x3;
pub(crate) const STREAM_SYNTH: u64 = 0x4;
pub(crate) const STREAM_SPLIT: u64 = 0x5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with a sequence of coordinates into a new 64-bit seed.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(seed), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn stream(seed: u64, coords: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, coords))
}
