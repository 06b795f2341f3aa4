//! Keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream whose key is
//! derived from `(seed, purpose, index)`. Two runs with the same seed see the
//! same numbers no matter in which order replications or time steps execute.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Initial = 1,
    Resample = 2,
    Propagate = 3,
    Scramble = 4,
    Simulate = 5,
    Replication = 6,
}

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a sequence of keys.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    keys.iter().fold(mix64(seed), |acc, &k| {
        mix64(acc ^ mix64(k.wrapping_add(0x632b_e59b_d9b4_e019)))
    })
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[purpose as u64, index]))
}

/// Fill `out` with IID uniforms from the stream keyed by `(seed, purpose, index)`.
pub fn fill_uniform(seed: u64, purpose: Purpose, index: u64, out: &mut [f64]) {
    let mut rng = stream(seed, purpose, index);
    out.iter_mut().for_each(|x| *x = rng.gen::<f64>());
}
