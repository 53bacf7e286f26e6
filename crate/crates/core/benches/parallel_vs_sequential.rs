use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psl2_rigidity::fuzz::{run_fuzz, sample_trial, trial_rng, FuzzMode};
use psl2_rigidity::rigidity::{rotation_spectrum_with, RigidityParams};
use psl2_rigidity::rotnum::{lift_of_element, poincare_rotation_number};
use psl2_rigidity::sampling::random_elliptic;
use psl2_rigidity::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn spectrum(c: &mut Criterion) {
    let rho = sample_trial(1, 0, FuzzMode::Planted).rho1;
    let mut group = c.benchmark_group("rotation_spectrum_radius_7");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| rotation_spectrum_with(&rho, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn fuzz_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("fuzz_planted_32");
    group.sample_size(10);
    for (name, execution) in MODES {
        let params = RigidityParams {
            execution,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_fuzz(1, 32, FuzzMode::Planted, &params))
        });
    }
    group.finish();
}

fn oracle_batch(c: &mut Criterion) {
    let elements: Vec<_> = (0..16).map(|i| random_elliptic(&mut trial_rng(2, i))).collect();
    let mut group = c.benchmark_group("poincare_oracle_16x10k");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&elements, |g| poincare_rotation_number(&lift_of_element(g), 0.0, 10_000)))
        });
    }
    group.finish();
}

criterion_group!(benches, spectrum, fuzz_batch, oracle_batch);
criterion_main!(benches);
