//! Solver-side benchmarks. Group names embed the execution mode, so runs
//! with and without the `parallel` feature land side by side in criterion's
//! report directory:
//!
//!   cargo bench -p gbsvm --bench solver
//!   cargo bench -p gbsvm --bench solver --no-default-features

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gbsvm::granular_ball::generate;
use gbsvm::model::dual_objective;
use gbsvm::pso::{initialize_swarm, pso_step, solve};
use gbsvm::{experiment, BallGenConfig, GranularBall, Label, NoiseSpec, PsoConfig};

fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}

fn noisy_balls(n: usize, seed: u64) -> Vec<GranularBall> {
    let ds = experiment::gaussian_blobs(n, 4.0, seed)
        .unwrap()
        .inject_label_noise(&NoiseSpec { rate: 0.15, seed })
        .unwrap()
        .normalize_minmax();
    generate(&ds, &BallGenConfig::default()).unwrap()
}

fn bench_pso_step(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("pso_step/{}", mode()));
    for n in [200usize, 800] {
        let balls = noisy_balls(n, 41);
        let labels: Vec<Label> = balls.iter().map(|b| b.label).collect();
        let fitness = |alpha: &[f64]| dual_objective(alpha, &balls).unwrap();
        let cfg = PsoConfig { pop: 100, seed: 41, ..Default::default() };
        let c_bound = 10.0;
        let mut swarm = initialize_swarm(&cfg, &labels, c_bound, &fitness).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(balls.len()), &(), |b, _| {
            b.iter(|| {
                pso_step(&mut swarm, &fitness, &cfg, &labels, c_bound).unwrap();
                black_box(swarm.global_best_fitness)
            })
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let balls = noisy_balls(200, 43);
    let cfg = PsoConfig { pop: 60, max_iter: 80, seed: 43, ..Default::default() };
    c.bench_function(&format!("solve/{}", mode()), |b| {
        b.iter(|| black_box(solve(&balls, 10.0, &cfg).unwrap()))
    });
}

fn bench_noise_sweep(c: &mut Criterion) {
    let ds = experiment::gaussian_blobs(120, 4.0, 47).unwrap();
    let cfg = experiment::ExperimentConfig {
        noise_rates: vec![0.0, 0.2],
        repeats: 2,
        pso: PsoConfig { pop: 20, max_iter: 30, seed: 47, ..Default::default() },
        ..Default::default()
    };
    let mut group = c.benchmark_group(format!("noise_sweep/{}", mode()));
    group.sample_size(10);
    group.bench_function("4cells", |b| {
        b.iter(|| black_box(experiment::run_noise_sweep(&ds, &cfg).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_pso_step, bench_solve, bench_noise_sweep);
criterion_main!(benches);
