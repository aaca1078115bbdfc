use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use secants::sampler::{self, SampleConfig};
use secants::{data, tracker, Execution, TrackerConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn solve(c: &mut Criterion) {
    let base = TrackerConfig::default();
    let start = tracker::bootstrap_start_set(&base).unwrap();
    let target = data::reference().witnesses()[0].matrix.clone();
    let mut group = c.benchmark_group("solve");
    for (name, execution) in MODES {
        let config = TrackerConfig { execution, ..base.clone() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| tracker::solve_at_parameter(&target, &start, &config).unwrap())
        });
    }
    group.finish();
}

fn sample(c: &mut Criterion) {
    let config = TrackerConfig::default();
    let start = tracker::bootstrap_start_set(&config).unwrap();
    let mut group = c.benchmark_group("sample_64");
    group.sample_size(10);
    for (name, execution) in MODES {
        let sample = SampleConfig {
            execution,
            ..SampleConfig::uniform(64, 7)
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sampler::run_batch(&sample, &start, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solve, sample);
criterion_main!(benches);
