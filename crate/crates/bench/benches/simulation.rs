//! Monte Carlo throughput: trials per second for each tree kind, plus
//! the paired-search covariance estimator.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use treepgf_core::dst::{KeyModel, SearchKind};
use treepgf_core::montecarlo::{self, SimConfig, DEFAULT_SEED};

const TRIALS: u64 = 20_000;

fn tree_simulators(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.throughput(Throughput::Elements(TRIALS));
    for n in [16u64, 100] {
        g.bench_with_input(BenchmarkId::new("bst-unsuccessful", n), &n, |b, &n| {
            let cfg = SimConfig::new(n, SearchKind::Unsuccessful, KeyModel::Infinite)
                .trials(TRIALS);
            b.iter(|| montecarlo::simulate_bst(&cfg))
        });
        g.bench_with_input(BenchmarkId::new("dst-successful", n), &n, |b, &n| {
            let cfg =
                SimConfig::new(n, SearchKind::Successful, KeyModel::Infinite).trials(TRIALS);
            b.iter(|| montecarlo::simulate_dst(&cfg))
        });
    }
    g.finish();
}

fn covariance_estimator(c: &mut Criterion) {
    let mut g = c.benchmark_group("covariance");
    g.throughput(Throughput::Elements(TRIALS));
    g.sample_size(10);
    g.bench_function("n64", |b| {
        b.iter(|| montecarlo::simulate_dst_cost_covariance(64, TRIALS, DEFAULT_SEED).unwrap())
    });
    g.finish();
}

criterion_group!(benches, tree_simulators, covariance_estimator);
criterion_main!(benches);
