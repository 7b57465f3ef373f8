use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use implicert_bench::{fixed_instance, parity_model, parity_table};
use implicert_core::certifier::{find_certificate, wire_parameters, CertifierConfig};
use implicert_core::estimators::{estimate_noise_sensitivity, EstimatorConfig};
use implicert_core::oracles::{exact_dt_complexity, exact_noise_sensitivity, walsh_hadamard};
use implicert_core::tree::{ImplicitTree, ScoreMode, TreeParams};

fn bench_walsh_hadamard(c: &mut Criterion) {
    let mut group = c.benchmark_group("walsh_hadamard");
    for d in [10usize, 14, 16] {
        let t = parity_table(d);
        group.bench_with_input(BenchmarkId::from_parameter(d), &t, |b, t| {
            b.iter(|| walsh_hadamard(black_box(t)))
        });
    }
    group.finish();
}

fn bench_exact_ns(c: &mut Criterion) {
    let t = parity_table(12);
    c.bench_function("exact_ns_d12", |b| {
        b.iter(|| exact_noise_sensitivity(black_box(&t), 0.1).unwrap())
    });
}

fn bench_ns_estimator(c: &mut Criterion) {
    let f = parity_model(16);
    let cfg = EstimatorConfig::new(1000, 7, 0.1).unwrap();
    c.bench_function("ns_estimate_m1000_d16", |b| {
        b.iter(|| estimate_noise_sensitivity(black_box(&f), &cfg).unwrap())
    });
}

fn bench_dt_complexity(c: &mut Criterion) {
    let t = parity_table(8);
    c.bench_function("dt_complexity_parity_d8", |b| {
        b.iter(|| exact_dt_complexity(black_box(&t), 0.0).unwrap())
    });
}

fn bench_exact_walk(c: &mut Criterion) {
    let f = parity_model(10);
    let x = fixed_instance(10);
    c.bench_function("exact_walk_d10_k2", |b| {
        b.iter_batched(
            || {
                ImplicitTree::new(
                    TreeParams::new(2, 0.1, 0.1, 7, ScoreMode::ExactOracle),
                    f.clone(),
                )
                .unwrap()
            },
            |tree| tree.walk(black_box(&x)).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn bench_certify_monte_carlo(c: &mut Criterion) {
    let f = parity_model(8);
    let x = fixed_instance(8);
    let cfg = CertifierConfig::new(0.2, 0.2).unwrap().with_depth(2).with_seed(5);
    let mut params = wire_parameters(&cfg, 8).unwrap();
    params.noise_rate = 0.5;
    params.score_tolerance = 0.1;
    c.bench_function("certify_mc_d8_k2", |b| {
        b.iter(|| find_certificate(black_box(&f), &x, &cfg, &params).unwrap())
    });
}

criterion_group!(
    benches,
    bench_walsh_hadamard,
    bench_exact_ns,
    bench_ns_estimator,
    bench_dt_complexity,
    bench_exact_walk,
    bench_certify_monte_carlo
);
criterion_main!(benches);
