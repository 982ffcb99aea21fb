use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mfpt::model::solve_gap;
use mfpt::oracle::{diagonalize_many, BasisConfig};
use mfpt::resum::borel_sum_with;
use mfpt::series::compute_corrections;
use mfpt::table::{reproduce_table, TableOptions, REFERENCE_ROWS};
use mfpt::{Execution, OscillatorKind, OscillatorSpec};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn borel_partial_sums(c: &mut Criterion) {
    let row = &REFERENCE_ROWS[8];
    let spec = row.spec();
    let series = compute_corrections(&spec, &solve_gap(&spec).unwrap(), row.n_c).unwrap();
    let cfg = row.borel_config();
    let mut group = c.benchmark_group("borel_partial_sums");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| borel_sum_with(black_box(&series), &cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn oracle_sweep(c: &mut Criterion) {
    let specs: Vec<OscillatorSpec> = (0..16)
        .map(|i| {
            OscillatorSpec::from_f64(
                OscillatorKind::Qaho,
                10f64.powf(-1.0 + 3.0 * i as f64 / 15.0),
                0,
            )
            .unwrap()
        })
        .collect();
    let basis = BasisConfig::default();
    let mut group = c.benchmark_group("oracle_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| diagonalize_many(black_box(&specs), &basis, exec))
        });
    }
    group.finish();
}

fn reference_table(c: &mut Criterion) {
    let mut group = c.benchmark_group("reference_table");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = TableOptions {
            exec,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| reproduce_table(black_box(&opts)))
        });
    }
    group.finish();
}

criterion_group!(benches, borel_partial_sums, oracle_sweep, reference_table);
criterion_main!(benches);
