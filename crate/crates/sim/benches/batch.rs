use criterion::{criterion_group, criterion_main, Criterion};
use rpm_sim::{generate_trace, generate_workload, node_names, run_many_parallel, run_many_sequential, Job, SimConfig};
use rpm_sync::Routing;

fn jobs() -> Vec<Job> {
    (0..32)
        .map(|seed| Job {
            trace: generate_trace(10, 20_000.0, 5e-4, seed).unwrap(),
            workload: generate_workload(&node_names(10), 40, 20_000.0, seed),
            config: SimConfig::new(Routing::Epidemic, seed, 20_000.0),
        })
        .collect()
}

fn batch(c: &mut Criterion) {
    let jobs = jobs();
    let mut g = c.benchmark_group("batch_32_runs");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| run_many_sequential(&jobs)));
    g.bench_function("parallel", |b| b.iter(|| run_many_parallel(&jobs)));
    g.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
