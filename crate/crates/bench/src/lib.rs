//! Workload generators shared by the kernel benchmarks.

use sqmc_core::normal::inv_cdf;
use sqmc_core::resample::WeightVector;
use sqmc_core::rng::{fill_uniform, Purpose};

/// `n` standard Gaussian points in dimension `d`, row-major.
pub fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Vec<f64> {
    let mut u = vec![0.0; n * d];
    fill_uniform(seed, Purpose::Simulate, 0, &mut u);
    u.iter().map(|&v| inv_cdf(v)).collect()
}

/// Normalised weights proportional to `exp` of standard Gaussian draws.
pub fn lognormal_weights(n: usize, seed: u64) -> WeightVector {
    let raw = gaussian_cloud(n, 1, seed)
        .into_iter()
        .map(f64::exp)
        .collect();
    WeightVector::normalized(raw).expect("finite positive weights")
}

/// Sorted uniforms, as fed to the inverse-CDF resampler.
pub fn sorted_uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut u = vec![0.0; n];
    fill_uniform(seed, Purpose::Resample, 0, &mut u);
    u.sort_by(f64::total_cmp);
    u
}
