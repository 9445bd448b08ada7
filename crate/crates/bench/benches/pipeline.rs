use agm_bench::{affiliations, dataset, power_law};
use agm_core::network::{self, HopOptions, SpectralOptions};
use agm_core::{generate, FitConfig, FitProblem, GenerateOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn bench_generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    for n in [2_000, 20_000] {
        let net = affiliations(n, n / 10);
        let params = power_law(&net);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| generate(&net, &params, 7, &GenerateOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn bench_fit(c: &mut Criterion) {
    let ds = dataset(2_000, 200, 1);
    let problem = FitProblem::new(&ds.graph, &ds.affiliations, false).unwrap();
    c.bench_function("fit/2000", |b| b.iter(|| problem.fit(&FitConfig::default()).unwrap()));
}

fn bench_metrics(c: &mut Criterion) {
    let ds = dataset(20_000, 2_000, 2);
    let g = &ds.graph;
    c.bench_function("triangles/20000", |b| b.iter(|| network::node_triangles(black_box(g))));
    c.bench_function("clustering/20000", |b| b.iter(|| network::clustering_distribution(g)));
    c.bench_function("hop_plot/20000", |b| {
        b.iter(|| network::hop_plot(g, &HopOptions::default()).unwrap())
    });
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    group.bench_function("20000", |b| {
        b.iter(|| network::spectral_summary(g, &SpectralOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_generate, bench_fit, bench_metrics);
criterion_main!(benches);
