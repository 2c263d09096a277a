//! Compares the data-parallel code paths against their sequential twins:
//! exact isometry-constant enumeration and a batch of sweep trials.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ntot::experiments::{sweep_trials, Axis, SweepSpec};
use ntot::linalg::Matrix;
use ntot::rip::{exact_ric, exact_ric_sequential};
use ntot::rng::GaussianRng;
use ntot::solvers::Variant;

fn ric_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_ric");
    let mut rng = GaussianRng::new(0xBE9C);
    for &(n, q) in &[(14usize, 4usize), (16, 5)] {
        let a = Matrix::new(6, n, rng.gaussian_vec(6 * n)).unwrap();
        group.bench_with_input(BenchmarkId::new("parallel", format!("n{n}_q{q}")), &a, |b, a| {
            b.iter(|| exact_ric(a, q).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("sequential", format!("n{n}_q{q}")),
            &a,
            |b, a| b.iter(|| exact_ric_sequential(a, q).unwrap()),
        );
    }
    group.finish();
}

fn sweep_bench(c: &mut Criterion) {
    let sweep = SweepSpec {
        axis: Axis::KOverN,
        grid: vec![0.05, 0.15, 0.25],
        trials_per_point: 8,
        algorithms: vec![Variant::Nsiht, Variant::Nshtp],
        m: 32,
        n: 64,
        k: 0,
        base_seed: 0xD06,
        max_outer_iter: 15,
        eps: None,
        lambda: 5.0,
        noise_scale: 0.0,
    };
    let mut group = c.benchmark_group("sweep_trials");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| sweep_trials(&sweep, true).unwrap()));
    group.bench_function("sequential", |b| b.iter(|| sweep_trials(&sweep, false).unwrap()));
    group.finish();
}

criterion_group!(benches, ric_bench, sweep_bench);
criterion_main!(benches);
