//! Low-discrepancy point sets: Sobol' nets with nested (Owen) scrambling and
//! the base-2 Van der Corput sequence.

mod scramble;
mod sobol;

pub use scramble::ScrambleState;
pub use sobol::{sobol_block, DirectionTable, PointSet, SobolSpec, MAX_BITS};

/// Base-2 radical inverse of `n`.
pub fn van_der_corput(n: u64) -> f64 {
    n.reverse_bits() as f64 * (1.0 / 18_446_744_073_709_551_616.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_small_indices() {
        assert_eq!(van_der_corput(1), 0.5);
        assert_eq!(van_der_corput(2), 0.25);
        assert_eq!(van_der_corput(3), 0.75);
        assert_eq!(van_der_corput(6), 0.375);
    }
}
