use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sdemem::bsl::{simulate_summaries, ModelSimulator};
use sdemem::model::{presets, simulate_dataset};
use sdemem::smc::{dataset_loglik, FilterKind, SmcConfig};
use sdemem::{Execution, ModelKind, Stream};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn particle_filter(c: &mut Criterion) {
    let theta = presets::simulation_truth();
    let ds = simulate_dataset(&theta, &presets::group3_design(), Stream::new(1)).unwrap();
    let mut group = c.benchmark_group("dataset_loglik");
    for filter in [FilterKind::Bootstrap, FilterKind::Auxiliary] {
        for (name, execution) in POLICIES {
            let cfg = SmcConfig { particles: 500, first_stage: 5, filter, execution };
            group.bench_with_input(BenchmarkId::new(filter.as_str(), name), &cfg, |b, cfg| {
                b.iter(|| dataset_loglik(&ds, &theta, cfg, Stream::new(2)).unwrap())
            });
        }
    }
    group.finish();
}

fn synthetic_simulations(c: &mut Criterion) {
    let theta = presets::simulation_truth();
    let sim = ModelSimulator::new(&presets::group3_design(), ModelKind::TwoCompartment).unwrap();
    let u = theta.to_unconstrained().unwrap();
    let mut group = c.benchmark_group("simulate_summaries");
    group.sample_size(20);
    for (name, execution) in POLICIES {
        group.bench_function(BenchmarkId::new("n500", name), |b| {
            b.iter(|| simulate_summaries(&sim, &u, 500, execution, Stream::new(3)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, particle_filter, synthetic_simulations);
criterion_main!(benches);
