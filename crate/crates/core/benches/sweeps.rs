//! Sequential vs rayon execution on the grid workloads.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gcm_core::sweep::{self, geomspace, linspace, Execution};
use gcm_core::transforms::{MomentQuery, Transforms};
use gcm_core::verify::Verifier;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn moment_grid(c: &mut Criterion) {
    let t = Transforms::exact(1e-10);
    let queries: Vec<MomentQuery> = geomspace(0.1, 10.0, 21)
        .into_iter()
        .flat_map(|x| (1..=6).map(move |k| MomentQuery::new(x, k).unwrap()))
        .collect();
    let mut g = c.benchmark_group("moment_grid");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep::map(exec, &queries, |&q| t.g_moment(q).unwrap()))
        });
    }
    g.finish();
}

fn phi_table(c: &mut Criterion) {
    let t = Transforms::exact(1e-10);
    let grid = linspace(0.0, 20.0, 200);
    let mut g = c.benchmark_group("phi_table");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| t.phi_table(exec, &grid)));
    }
    g.finish();
}

fn psd_trials(c: &mut Criterion) {
    let mut g = c.benchmark_group("psd_trials");
    g.sample_size(10);
    for (name, exec) in MODES {
        let v = Verifier::default().with_execution(exec);
        g.bench_function(name, |b| b.iter(|| v.check_positive_definiteness(1.0, 6, 50, 7)));
    }
    g.finish();
}

fn representation(c: &mut Criterion) {
    let mut g = c.benchmark_group("representation_check");
    g.sample_size(10);
    for (name, exec) in MODES {
        let v = Verifier::default().with_execution(exec);
        g.bench_function(name, |b| b.iter(|| v.check_representation()));
    }
    g.finish();
}

criterion_group!(benches, moment_grid, phi_table, psd_trials, representation);
criterion_main!(benches);
