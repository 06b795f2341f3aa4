use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use sqmc_bench::{gaussian_cloud, lognormal_weights, sorted_uniforms};
use sqmc_core::hilbert::{hilbert_sort_permutation, HilbertConfig, PsiTransform};
use sqmc_core::lowdisc::{sobol_block, ScrambleState, SobolSpec};
use sqmc_core::models::{Formalism, LinGaussModel};
use sqmc_core::resample::{inverse_cdf_ancestors, multinomial_ancestors};
use sqmc_core::{run_smc, run_sqmc, SmcConfig, SqmcConfig};

const SIZES: [usize; 3] = [1 << 10, 1 << 12, 1 << 14];

fn sobol(c: &mut Criterion) {
    let mut g = c.benchmark_group("sobol_block_d6");
    let spec = SobolSpec::new(6).unwrap();
    let scramble = ScrambleState::new(11);
    for n in SIZES {
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("plain", n), &n, |b, &n| {
            b.iter(|| sobol_block(&spec, None, n, 0).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("scrambled", n), &n, |b, &n| {
            b.iter(|| sobol_block(&spec, Some(&scramble), n, 0).unwrap())
        });
    }
    g.finish();
}

fn hilbert(c: &mut Criterion) {
    let mut g = c.benchmark_group("hilbert_sort");
    for d in [2usize, 5] {
        let cfg = HilbertConfig::with_default_bits(d).unwrap();
        for n in SIZES {
            let cloud = gaussian_cloud(n, d, 3);
            let psi = PsiTransform::from_cloud(&cloud, d).unwrap();
            g.throughput(Throughput::Elements(n as u64));
            g.bench_with_input(BenchmarkId::new(format!("d{d}"), n), &n, |b, _| {
                b.iter(|| hilbert_sort_permutation(black_box(&cloud), &psi, &cfg).unwrap())
            });
        }
    }
    g.finish();
}

fn resampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("resampling");
    for n in SIZES {
        let w = lognormal_weights(n, 5);
        let u = sorted_uniforms(n, 6);
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("inverse_cdf", n), &n, |b, _| {
            b.iter(|| inverse_cdf_ancestors(black_box(&u), &w).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("multinomial", n), &n, |b, &n| {
            b.iter(|| multinomial_ancestors(&w, n, 9).unwrap())
        });
    }
    g.finish();
}

fn filters(c: &mut Criterion) {
    let mut g = c.benchmark_group("filter_lin_gauss_d2_t10");
    g.sample_size(10);
    let data = LinGaussModel::simulate(2, 0.4, 10, 1);
    let model = LinGaussModel::new(2, 0.4, Formalism::Guided, data.observations).unwrap();
    for n in [1usize << 10, 1 << 12] {
        g.bench_with_input(BenchmarkId::new("smc", n), &n, |b, &n| {
            b.iter(|| run_smc(&model, &SmcConfig::new(n, 10, 2)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("sqmc", n), &n, |b, &n| {
            b.iter(|| run_sqmc(&model, &SqmcConfig::new(n, 10, 2)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sobol, hilbert, resampling, filters);
criterion_main!(benches);
