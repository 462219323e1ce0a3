//! Parallel vs sequential timing of the per-ray hot loops: the wave-potential
//! Laplacian kernel and one full integrator step on a large Gaussian front.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use helmray::dynamics::{LaunchMode, Stepper};
use helmray::exec::Exec;
use helmray::front::log_amplitude_laplacian;
use helmray::scenarios::{build_launch_front, ScenarioConfig, ScenarioKind};
use helmray::units::make_unit_system;

fn big_front_config(n_rays: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Gaussian);
    cfg.n_rays = n_rays;
    cfg
}

fn bench_laplacian(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_amplitude_laplacian");
    for &n in &[4097usize, 16385, 65537] {
        let cfg = big_front_config(n);
        let units = cfg.unit_system().unwrap();
        let front = build_launch_front(&cfg, &units).unwrap();
        let s = front.arclength();
        let r = front.amplitudes();
        for (label, exec) in [("seq", Exec::Sequential), ("par", Exec::Parallel)] {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| log_amplitude_laplacian(&s, &r, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("stepper_step");
    group.sample_size(20);
    for &n in &[4097usize, 16385] {
        let cfg = big_front_config(n);
        let units = cfg.unit_system().unwrap();
        let potential = cfg.potential.clone();
        let mut front = build_launch_front(&cfg, &units).unwrap();
        let mut stepper = Stepper::new(&units, &potential, cfg.regime);
        stepper.initialize(&mut front, LaunchMode::MatchEnergy).unwrap();
        let dt = 1e-4;
        for (label, exec) in [("seq", Exec::Sequential), ("par", Exec::Parallel)] {
            stepper.exec = exec;
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| stepper.step(&front, dt).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_laplacian, bench_step);
criterion_main!(benches);
