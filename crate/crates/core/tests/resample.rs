use proptest::prelude::*;
use sqmc_core::resample::{inverse_cdf_ancestors_counted, sorted_ancestors_by_state, WeightVector};

// Binary search on the cumulative sums: the smallest n with u < C_n.
fn searchsorted(u: &[f64], w: &[f64]) -> Vec<usize> {
    let mut c = Vec::with_capacity(w.len());
    let mut s = 0.0;
    for &x in w {
        s += x;
        c.push(s);
    }
    let last_positive = w.iter().rposition(|&x| x > 0.0).unwrap();
    u.iter()
        .map(|&x| c.partition_point(|&ci| ci <= x).min(last_positive))
        .collect()
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..300).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![3 => 0.0f64..10.0, 1 => Just(0.0)], n),
            prop::collection::vec(0.0f64..1.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matches_binary_search_oracle((raw, mut u) in instance()) {
        prop_assume!(raw.iter().any(|&x| x > 0.0));
        let w = WeightVector::normalized(raw).unwrap();
        u.sort_by(f64::total_cmp);
        let (a, advances) = inverse_cdf_ancestors_counted(&u, &w).unwrap();
        prop_assert!(advances <= w.len());
        let oracle = searchsorted(&u, w.as_slice());
        for (i, (&got, &want)) in a.iter().zip(&oracle).enumerate() {
            // Cumulative sums may differ in the last ulp from the oracle's.
            if got != want {
                let c: f64 = w.as_slice()[..=got.min(want)].iter().sum();
                prop_assert!((c - u[i]).abs() < 1e-12, "u = {}, got {got}, want {want}", u[i]);
            }
            prop_assert!(w.as_slice()[got] > 0.0);
        }
    }

    #[test]
    fn normalised_weights_are_exact(raw in prop::collection::vec(1e-100f64..1e100, 1..500)) {
        let w = WeightVector::normalized(raw.clone()).unwrap();
        let s: f64 = w.as_slice().iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-15 * raw.len() as f64);
        let ratio = w.as_slice()[0] / raw[0];
        for (a, b) in w.as_slice().iter().zip(&raw) {
            prop_assert!((a / b / ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn permuted_weights_follow_the_order(raw in prop::collection::vec(0.1f64..1.0, 2..50), seed in any::<u64>()) {
        let n = raw.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (i as u64).wrapping_mul(seed | 1).rotate_left(17));
        let w = WeightVector::normalized(raw).unwrap();
        let u: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let labels = sorted_ancestors_by_state(&u, &w, &order).unwrap();
        let permuted = WeightVector::normalized(order.iter().map(|&i| w.as_slice()[i]).collect()).unwrap();
        let ranks = inverse_cdf_ancestors_counted(&u, &permuted).unwrap().0;
        prop_assert_eq!(labels, ranks.iter().map(|&r| order[r]).collect::<Vec<_>>());
    }
}
