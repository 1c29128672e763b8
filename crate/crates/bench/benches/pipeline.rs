use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use tpi_core::optics::fft::fft2;
use tpi_core::optics::{new_plane_wave, propagate, OpticalLayout};
use tpi_core::scene::{builtin_object, FrameSimulator, SimulationGrid, SourceSpec};
use tpi_core::sensor::{detect, Camera, NoiseModel};
use tpi_core::{CorrelatorState, TurbulenceSpec};

fn bench_fft(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft2");
    for n in [64usize, 128, 256] {
        let data: Vec<Complex64> = (0..n * n).map(|i| Complex64::new((i % 7) as f64, (i % 3) as f64)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let mut d = data.clone();
                fft2(&mut d, n);
                black_box(d)
            })
        });
    }
    group.finish();
}

fn bench_propagate(c: &mut Criterion) {
    let field = new_plane_wave(128, 20e-6, 532e-9, 1.0).unwrap();
    c.bench_function("propagate_128", |b| b.iter(|| propagate(black_box(&field), 0.05).unwrap()));
}

fn simulator(n: usize) -> FrameSimulator {
    let grid = SimulationGrid::new(n, 20e-6, 532e-9).unwrap();
    let mask = builtin_object("Q", n, 0.6).unwrap().with_diffuse(true);
    FrameSimulator::new(grid, SourceSpec::default(), mask, OpticalLayout::experiment_default(), TurbulenceSpec::none())
        .unwrap()
}

fn bench_frame(c: &mut Criterion) {
    let sim = simulator(128);
    let noise = NoiseModel::default();
    let mut k = 0u64;
    c.bench_function("simulate_and_detect_128", |b| {
        b.iter(|| {
            k += 1;
            let (e1, e2) = sim.simulate(1, k).unwrap();
            let f1 = detect(&e1, &noise, Camera::One, 1, k).unwrap();
            let f2 = detect(&e2, &noise, Camera::Two, 1, k).unwrap();
            black_box((f1, f2))
        })
    });
}

fn bench_accumulate(c: &mut Criterion) {
    let sim = simulator(128);
    let noise = NoiseModel::default();
    let (e1, e2) = sim.simulate(1, 0).unwrap();
    let f1 = detect(&e1, &noise, Camera::One, 1, 0).unwrap();
    let f2 = detect(&e2, &noise, Camera::Two, 1, 0).unwrap();
    let mut state = CorrelatorState::new(128, 128);
    c.bench_function("accumulate_128", |b| b.iter(|| state.accumulate(&f1, &f2, true).unwrap()));
}

criterion_group!(benches, bench_fft, bench_propagate, bench_frame, bench_accumulate);
criterion_main!(benches);
