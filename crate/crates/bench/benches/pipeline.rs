use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tmsv_bench::{deployed_config, noise};
use tmsv_core::bessel::bessel_j;
use tmsv_core::dsp;
use tmsv_core::gaussian::{analytic_squeezing, joint_variances, lossy_two_mode_squeezed_state};
use tmsv_core::synth::synthesize_pair;

fn gaussian(c: &mut Criterion) {
    c.bench_function("analytic_squeezing", |b| {
        b.iter(|| analytic_squeezing(black_box(0.986), black_box(0.3097), black_box(0.2576)))
    });
    c.bench_function("composed_four_mode_state", |b| {
        b.iter(|| {
            let s = lossy_two_mode_squeezed_state(black_box(0.986), 0.3097, 0.2576).unwrap();
            joint_variances(&s, 1, 2).unwrap()
        })
    });
}

fn bessel(c: &mut Criterion) {
    let mut g = c.benchmark_group("bessel_j");
    for x in [5.31, 25.0] {
        g.bench_with_input(BenchmarkId::from_parameter(x), &x, |b, &x| {
            b.iter(|| bessel_j(4, black_box(x)))
        });
    }
    g.finish();
}

fn rolling(c: &mut Criterion) {
    let x = noise(475_000, 1);
    let mut g = c.benchmark_group("rolling_variance_475k");
    for w in [10_000, 400_000] {
        g.bench_with_input(BenchmarkId::from_parameter(w), &w, |b, &w| {
            b.iter(|| dsp::rolling_variance(black_box(&x), w).unwrap())
        });
    }
    g.finish();
}

fn delay(c: &mut Criterion) {
    let q1 = noise(47_500, 2);
    let q2: Vec<f64> = q1
        .iter()
        .zip(noise(47_500, 3))
        .map(|(a, b)| 0.7 * a + 0.3 * b)
        .collect();
    let mut g = c.benchmark_group("delay_search");
    g.sample_size(10);
    g.bench_function("47k_pm20", |b| {
        b.iter(|| dsp::delay_search(black_box(&q1), &q2, 20, 2000).unwrap())
    });
    g.finish();
}

fn synthesis(c: &mut Criterion) {
    let cfg = deployed_config(4e-4, 7);
    let mut g = c.benchmark_group("synthesis");
    g.sample_size(10);
    g.bench_function("pair_200k_samples", |b| {
        b.iter(|| synthesize_pair(black_box(&cfg)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, gaussian, bessel, rolling, delay, synthesis);
criterion_main!(benches);
