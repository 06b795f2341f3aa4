//! Nested uniform (Owen) scrambling with hashed node permutations.
//!
//! Owen's scramble flips digit `k` of a coordinate according to a random
//! bit attached to the node of the binary tree reached by the first `k`
//! digits. Storing the tree is `O(2^bits)`; here each node's bit is a keyed
//! hash of `(seed, dimension, depth, prefix)`, which gives the same joint
//! law with `O(1)` state. Digits below the output precision are filled with
//! a hashed uniform, so every scrambled coordinate is exactly uniform on
//! `[0, 1)`.

use crate::rng::{derive_seed, mix64, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScrambleState {
    seed: u64,
}

impl ScrambleState {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Scramble used for time step `t` of a run keyed by `master_seed`.
    pub fn for_step(master_seed: u64, t: usize) -> Self {
        Self {
            seed: derive_seed(master_seed, &[Purpose::Scramble as u64, t as u64]),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn dimension_key(&self, dim: usize) -> u64 {
        mix64(self.seed ^ mix64(dim as u64 ^ 0x5851_f42d_4c95_7f2d))
    }

    /// Scramble the top `bits` digits of `digits` and map to `[0, 1)`.
    pub(crate) fn scramble_to_unit(key: u64, digits: u32, bits: u32) -> f64 {
        let mut flips = 0u32;
        for depth in 0..bits {
            let prefix = if depth == 0 {
                0
            } else {
                u64::from(digits >> (32 - depth))
            };
            // The marker bit separates equal prefixes at different depths.
            let node = prefix | (1u64 << depth);
            let bit = (mix64(key ^ node.wrapping_mul(0x9e37_79b9_7f4a_7c15)) >> 63) as u32;
            flips |= bit << (31 - depth);
        }
        let scrambled = digits ^ flips;
        let tail_node = u64::from(digits) | (1u64 << 32) | (u64::from(bits) << 33);
        let tail = (mix64(key.rotate_left(17) ^ tail_node) >> 11) as f64 / 9_007_199_254_740_992.0;
        let width = (1u64 << (32 - bits)) as f64;
        let x = (f64::from(scrambled) + tail * width) / 4_294_967_296.0;
        x.min(1.0 - f64::EPSILON / 2.0)
    }
}
