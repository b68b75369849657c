use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dowry_core::exact_dp::ThresholdVector;
use dowry_core::oracle::Oracle;
use dowry_core::prefix_tree::{build_annotated_tree, verify_compression_with};
use dowry_core::simulator::simulate_with;
use dowry_core::{Execution, TerminationModel};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn monte_carlo(c: &mut Criterion) {
    let ks = ThresholdVector::from_interview_order(1000, &[141, 223, 368]).unwrap();
    let mut group = c.benchmark_group("simulate_n1000_s3_20k");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_with(exec, 1000, &ks, TerminationModel::Query, 20_000, 7).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive_win_count_n8");
    group.sample_size(10);
    for (name, exec) in MODES {
        let oracle = Oracle {
            exec,
            ..Oracle::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| oracle.win_count(8, &[1, 2, 3]).unwrap())
        });
    }
    group.finish();
}

fn compression(c: &mut Criterion) {
    let tree = build_annotated_tree(8, 3).unwrap();
    let mut group = c.benchmark_group("verify_compression_n8_s3");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_compression_with(exec, &tree))
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, enumeration, compression);
criterion_main!(benches);
