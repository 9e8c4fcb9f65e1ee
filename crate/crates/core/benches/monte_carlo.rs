use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hoac::{make_fixed_guard_plan, make_unshielded_plan, AlphabetSpec, Experiment, SystemConfig};

fn configs() -> Vec<(&'static str, SystemConfig)> {
    let binary = vec![AlphabetSpec::uniform(2).unwrap(); 4];
    vec![
        (
            "unshielded_k4_m8",
            SystemConfig::new(
                binary.clone(),
                make_unshielded_plan(5, 8).unwrap(),
                1e8,
                1,
                20_000,
            )
            .unwrap(),
        ),
        (
            "guard_k4_m8",
            SystemConfig::new(
                binary.clone(),
                make_fixed_guard_plan(5, 8, 1).unwrap(),
                1e10,
                1,
                20_000,
            )
            .unwrap(),
        ),
        (
            "wide_k4_m40",
            SystemConfig::new(binary, make_unshielded_plan(5, 40).unwrap(), 1e8, 1, 5_000).unwrap(),
        ),
    ]
}

fn bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for (name, config) in configs() {
        let exp = Experiment::new(config.clone()).unwrap();
        group.throughput(Throughput::Elements(config.trials()));
        group.bench_with_input(BenchmarkId::new("sequential", name), &exp, |b, e| {
            b.iter(|| e.run_sequential())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", name), &exp, |b, e| {
            b.iter(|| e.run_parallel())
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
