use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gossip_pca::diagnostics::{measure_contraction, ChainSetup};
use gossip_pca::estimators::{gossip_pca, random_start, PcaConfig};
use gossip_pca::experiments::make_synthetic;
use gossip_pca::gossip::ComplexityLedger;
use gossip_pca::par::Executor;
use gossip_pca::rng::SeedStream;
use gossip_pca::sparsifier::SparsifyScheme;

fn executors() -> Vec<(&'static str, Executor)> {
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .max(2);
    vec![
        ("sequential", Executor::Sequential),
        ("parallel", Executor::with_threads(threads)),
    ]
}

fn independent_runs(c: &mut Criterion) {
    let n = 200;
    let m = make_synthetic(n, 0.5, &mut SeedStream::new(1).rng()).unwrap();
    let scheme = SparsifyScheme::new(n, 20.0).unwrap();
    let mut group = c.benchmark_group("gossip_pca_trials");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| {
                exec.map(16, |k| {
                    let mut rng = SeedStream::new(2).child(k as u64).rng();
                    let x0 = random_start(n, &mut rng);
                    gossip_pca(
                        &m,
                        &scheme,
                        &x0,
                        50,
                        &PcaConfig::default(),
                        &mut rng,
                        &mut ComplexityLedger::new(n),
                    )
                    .unwrap()
                    .estimate
                    .chi
                })
            })
        });
    }
    group.finish();
}

fn contraction(c: &mut Criterion) {
    let n = 100;
    let m = make_synthetic(n, 0.5, &mut SeedStream::new(3).rng()).unwrap();
    let setup = ChainSetup::new(
        m,
        SparsifyScheme::new(n, 30.0).unwrap(),
        10,
        &mut SeedStream::new(4).rng(),
    )
    .unwrap();
    let mut group = c.benchmark_group("contraction");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| measure_contraction(&setup, 64, 20, SeedStream::new(5), exec).rho_empirical)
        });
    }
    group.finish();
}

criterion_group!(benches, independent_runs, contraction);
criterion_main!(benches);
