use proptest::prelude::*;
use tpi_core::optics::{total_power, OpticalLayout};
use tpi_core::scene::{builtin_object, generate_source_frame, FrameSimulator, SimulationGrid, SourceSpec};
use tpi_core::turbulence::{
    apply_turbulence, cells_per_side, fried_parameter, make_phase_screen, per_mode_phases, TurbulenceSpec,
};
use tpi_core::Image;

const LAMBDA: f64 = 532e-9;

#[test]
fn fried_parameter_regression_values() {
    let r0 = fried_parameter(1.5e-10, 0.20, LAMBDA);
    assert!((r0 - 0.011_251_259_553_411_13).abs() < 1e-15, "r0 = {r0}");
    let strong = fried_parameter(1.0e-9, 0.20, LAMBDA);
    assert!((strong - 0.003_604_590_210_562_96).abs() < 1e-15, "r0 = {strong}");
}

#[test]
fn per_mode_phase_statistics() {
    let phases = per_mode_phases(100_000, 2.0, 11, 0);
    let n = phases.len() as f64;
    let mean = phases.iter().sum::<f64>() / n;
    let sd = (phases.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((sd - 2.0).abs() / 2.0 < 0.01, "sd {sd}");
    assert!(mean.abs() < 3.0 * 2.0 / n.sqrt());
}

#[test]
fn kolmogorov_structure_function() {
    let (n, pitch, cn2, l) = (128usize, 1e-3, 1.5e-10, 0.20);
    let r0 = fried_parameter(cn2, l, LAMBDA);
    let lags: Vec<usize> = (2..=n / 8).collect();
    let mut sums = vec![0.0; lags.len()];
    let mut counts = vec![0.0; lags.len()];
    for s in 0..200u64 {
        let phi = make_phase_screen(cn2, l, n, pitch, LAMBDA, 17, s).unwrap();
        for (li, &lag) in lags.iter().enumerate() {
            for r in 0..n {
                for c in 0..n - lag {
                    sums[li] += (phi[r * n + c + lag] - phi[r * n + c]).powi(2);
                    sums[li] += (phi[(c + lag) * n + r] - phi[c * n + r]).powi(2);
                    counts[li] += 2.0;
                }
            }
        }
    }
    for (li, &lag) in lags.iter().enumerate() {
        let measured = sums[li] / counts[li];
        let theory = 6.88 * (lag as f64 * pitch / r0).powf(5.0 / 3.0);
        let ratio = measured / theory;
        assert!((ratio - 1.0).abs() < 0.10, "lag {lag}: D/theory = {ratio}");
    }
}

#[test]
fn weak_turbulence_limit() {
    let strong = make_phase_screen(1e-10, 0.2, 64, 1e-3, LAMBDA, 1, 0).unwrap();
    let weak = make_phase_screen(1e-16, 0.2, 64, 1e-3, LAMBDA, 1, 0).unwrap();
    let var = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    // Same seed: the variance scales exactly with Cn2.
    let ratio = var(&weak) / var(&strong);
    assert!((ratio / 1e-6 - 1.0).abs() < 1e-9, "variance ratio {ratio}");
    assert!(make_phase_screen(0.0, 0.2, 64, 1e-3, LAMBDA, 1, 0).unwrap().iter().all(|&p| p == 0.0));
}

#[test]
fn model_none_is_identity() {
    let f = generate_source_frame(&SourceSpec::default(), 64, 20e-6, LAMBDA, 1, 0).unwrap();
    assert_eq!(apply_turbulence(&f, &TurbulenceSpec::none(), 2, 1, 0).unwrap(), f);
}

#[test]
fn frozen_refresh_reuses_the_screen() {
    let spec = TurbulenceSpec::phase_screen(1e-9, 0.2, 0.5).frozen();
    let f = generate_source_frame(&SourceSpec::default(), 64, 20e-6, LAMBDA, 1, 0).unwrap();
    let a = apply_turbulence(&f, &spec, 2, 3, 0).unwrap();
    let b = apply_turbulence(&f, &spec, 2, 3, 9).unwrap();
    assert_eq!(a, b);
}

/// A frozen screen with r₀ well below D/4 tilts the image of a point object.
#[test]
fn strong_frozen_screen_displaces_point_images() {
    let n = 128;
    let grid = SimulationGrid::new(n, 20e-6, LAMBDA).unwrap();
    let layout = OpticalLayout::experiment_default();
    let spec = TurbulenceSpec::phase_screen(1e-9, 0.2, 0.5).frozen();
    assert!(fried_parameter(spec.cn2, spec.path_length, LAMBDA) < layout.lens_diameter / 4.0);
    let mask = builtin_object("point", n, 1.0).unwrap();
    let sim = FrameSimulator::new(grid, SourceSpec::default(), mask, layout, spec).unwrap();
    let (c0x, c0y) = sim.expected_intensity().centroid().unwrap();
    let draws = 20;
    let mut total = 0.0;
    for seed in 0..draws {
        let image = Image::new(n, n, sim.image_field(seed, 0).unwrap().intensity()).unwrap();
        let (x, y) = image.centroid().unwrap();
        total += (x - c0x).hypot(y - c0y);
    }
    let mean = total / draws as f64;
    assert!(mean > 1.0, "mean displacement {mean} px");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn per_mode_turbulence_preserves_power(seed in any::<u64>(), sigma in 0.0f64..6.0, grain in 1usize..6) {
        let f = generate_source_frame(&SourceSpec { grain, ..SourceSpec::default() }, 64, 20e-6, LAMBDA, seed, 0).unwrap();
        let out = apply_turbulence(&f, &TurbulenceSpec::per_mode(sigma), grain, seed, 1).unwrap();
        let (p0, p1) = (total_power(&f), total_power(&out));
        prop_assert!((p1 - p0).abs() / p0 <= 1e-12);
        prop_assert_eq!(cells_per_side(64, grain), 64usize.div_ceil(grain));
    }

    #[test]
    fn phase_screens_preserve_power(seed in any::<u64>(), cn2_exp in -12.0f64..-8.0) {
        let f = generate_source_frame(&SourceSpec::default(), 32, 20e-6, LAMBDA, seed, 0).unwrap();
        let spec = TurbulenceSpec::phase_screen(10f64.powf(cn2_exp), 0.2, 0.3);
        let out = apply_turbulence(&f, &spec, 2, seed, 0).unwrap();
        let (p0, p1) = (total_power(&f), total_power(&out));
        prop_assert!((p1 - p0).abs() / p0 <= 1e-12);
    }
}
