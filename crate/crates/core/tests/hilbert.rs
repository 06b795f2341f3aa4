use proptest::prelude::*;
use sqmc_core::hilbert::{
    argsort, cell_key, hilbert_key, hilbert_point, hilbert_sort_permutation, key_cell,
    HilbertConfig, HilbertKey, PsiTransform,
};

fn all_cells(dim: usize, bits: u32) -> Vec<Vec<u64>> {
    let side = 1u64 << bits;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut i| {
            (0..dim)
                .map(|_| {
                    let c = i % side;
                    i /= side;
                    c
                })
                .collect()
        })
        .collect()
}

#[test]
fn exhaustive_bijection_and_adjacency() {
    for dim in 1..=4 {
        for bits in 1..=4u32 {
            let cfg = HilbertConfig::new(dim, bits).unwrap();
            let n = 1usize << (dim as u32 * bits);
            let mut by_key: Vec<Option<Vec<u64>>> = vec![None; n];
            for cell in all_cells(dim, bits) {
                let HilbertKey(k) = cell_key(&cell, &cfg);
                assert!((k as usize) < n, "key out of range d={dim} m={bits}");
                assert!(
                    by_key[k as usize].is_none(),
                    "duplicate key d={dim} m={bits}"
                );
                assert_eq!(key_cell(HilbertKey(k), &cfg).unwrap(), cell);
                by_key[k as usize] = Some(cell);
            }
            let cells: Vec<Vec<u64>> = by_key.into_iter().map(Option::unwrap).collect();
            for pair in cells.windows(2) {
                let dist: u64 = pair[0]
                    .iter()
                    .zip(&pair[1])
                    .map(|(a, b)| a.abs_diff(*b))
                    .sum();
                assert_eq!(
                    dist, 1,
                    "non-adjacent consecutive cells d={dim} m={bits}: {:?} {:?}",
                    pair[0], pair[1]
                );
            }
        }
    }
}

#[test]
fn curve_starts_at_origin() {
    for dim in 2..=4 {
        let cfg = HilbertConfig::new(dim, 3).unwrap();
        assert_eq!(key_cell(HilbertKey(0), &cfg).unwrap(), vec![0; dim]);
    }
}

#[test]
fn scalar_sort_matches_comparison_oracle() {
    let values: Vec<f64> = (0..64u64)
        .map(|i| ((i * 37 + 11) % 64) as f64 * 0.75 - 20.0 + (i % 3) as f64 * 1e-3)
        .collect();
    let psi = PsiTransform::from_cloud(&values, 1).unwrap();
    let cfg = HilbertConfig::with_default_bits(1).unwrap();
    let sigma = hilbert_sort_permutation(&values, &psi, &cfg).unwrap();
    let mut oracle: Vec<(f64, usize)> = values.iter().copied().zip(0..).collect();
    oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    assert_eq!(sigma, oracle.iter().map(|p| p.1).collect::<Vec<_>>());
    assert_eq!(argsort(&values), sigma);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn point_round_trip(dim in 2usize..=6, x in prop::collection::vec(0.0f64..1.0, 6)) {
        let cfg = HilbertConfig::with_default_bits(dim).unwrap();
        let p = &x[..dim];
        let centre = hilbert_point(hilbert_key(p, &cfg), &cfg).unwrap();
        let half = 0.5 / (1u64 << cfg.bits()) as f64;
        for (a, b) in p.iter().zip(&centre) {
            prop_assert!((a - b).abs() <= half + 1e-15);
        }
    }

    #[test]
    fn sort_is_a_permutation(dim in 1usize..=5, n in 1usize..200, seed in any::<u64>()) {
        let pts: Vec<f64> = (0..n * dim).map(|i| ((seed.wrapping_add(i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 11) as f64 / (1u64 << 53) as f64) * 10.0 - 5.0).collect();
        let psi = PsiTransform::from_cloud(&pts, dim).unwrap();
        let cfg = HilbertConfig::with_default_bits(dim).unwrap();
        let mut sigma = hilbert_sort_permutation(&pts, &psi, &cfg).unwrap();
        sigma.sort_unstable();
        prop_assert_eq!(sigma, (0..n).collect::<Vec<_>>());
    }
}
