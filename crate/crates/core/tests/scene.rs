use num_complex::Complex64;
use tpi_core::metrics::ncc;
use tpi_core::optics::{new_plane_wave, total_power, OpticalLayout};
use tpi_core::scene::{
    apply_object, builtin_object, generate_source_frame, BuiltinObject, FrameSimulator, ObjectMask, SimulationGrid,
    SourceMode, SourceSpec,
};
use tpi_core::sensor::{write_pgm8, unflip, Frame};
use tpi_core::{Error, Image, TurbulenceSpec};

const LAMBDA: f64 = 532e-9;

fn layout_with(d: f64) -> OpticalLayout {
    let mut l = OpticalLayout::experiment_default();
    l.lens_diameter = d;
    l
}

#[test]
fn source_frames_are_reproducible() {
    let spec = SourceSpec::default();
    let a = generate_source_frame(&spec, 64, 20e-6, LAMBDA, 42, 7).unwrap();
    let b = generate_source_frame(&spec, 64, 20e-6, LAMBDA, 42, 7).unwrap();
    assert_eq!(a, b);
    let c = generate_source_frame(&spec, 64, 20e-6, LAMBDA, 42, 8).unwrap();
    assert_ne!(a, c);
}

#[test]
fn unit_grain_source_has_unit_mean_intensity() {
    let spec = SourceSpec {
        grain: 1,
        ..SourceSpec::default()
    };
    let f = generate_source_frame(&spec, 256, 20e-6, LAMBDA, 1, 0).unwrap();
    let m = 256.0 * 256.0;
    let mean = f.intensity().iter().sum::<f64>() / m;
    // |E|² is exponential with unit mean and unit variance.
    let se = 1.0 / m.sqrt();
    assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");
}

#[test]
fn distinct_frames_are_uncorrelated() {
    let spec = SourceSpec {
        grain: 1,
        ..SourceSpec::default()
    };
    let a = generate_source_frame(&spec, 128, 20e-6, LAMBDA, 3, 0).unwrap();
    let b = generate_source_frame(&spec, 128, 20e-6, LAMBDA, 3, 1).unwrap();
    let m = (128 * 128) as f64;
    let corr: Complex64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x * y.conj()).sum::<Complex64>() / m;
    assert!(corr.norm() < 3.0 / m.sqrt(), "|<E0 E1*>| = {}", corr.norm());
}

#[test]
fn object_mask_identities() {
    let f = generate_source_frame(&SourceSpec::default(), 64, 20e-6, LAMBDA, 1, 0).unwrap();
    let ones = builtin_object("uniform", 64, 1.0).unwrap();
    assert_eq!(apply_object(&f, &ones).unwrap(), f);
    let zeros = ObjectMask::new(64, 64, vec![0.0; 64 * 64]).unwrap();
    assert_eq!(total_power(&apply_object(&f, &zeros).unwrap()), 0.0);

    let q = builtin_object("Q", 128, 0.5).unwrap();
    let flat = new_plane_wave(128, 20e-6, LAMBDA, 1.0).unwrap();
    let out = apply_object(&flat, &q).unwrap();
    let expected = total_power(&flat) * q.mean_reflectance();
    assert!((total_power(&out) - expected).abs() / expected < 1e-12);

    let small = builtin_object("uniform", 32, 1.0).unwrap();
    assert!(matches!(apply_object(&f, &small), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn q_glyph_is_a_single_connected_component() {
    let q = builtin_object("Q", 128, 0.5).unwrap();
    let n = 128;
    let on: Vec<bool> = q.reflectance().iter().map(|&r| r > 0.0).collect();
    let total = on.iter().filter(|&&b| b).count();
    assert!(total > 0 && total < n * n);
    let start = on.iter().position(|&b| b).unwrap();
    let mut seen = vec![false; n * n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 0;
    while let Some(i) = stack.pop() {
        count += 1;
        let (r, c) = ((i / n) as i64, (i % n) as i64);
        for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let (rr, cc) = (r + dr, c + dc);
            if rr >= 0 && cc >= 0 && rr < n as i64 && cc < n as i64 {
                let j = (rr * n as i64 + cc) as usize;
                if on[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    assert_eq!(count, total);
    // Roughly half the grid across.
    let cols: Vec<usize> = (0..n * n).filter(|&i| on[i]).map(|i| i % n).collect();
    let span = cols.iter().max().unwrap() - cols.iter().min().unwrap();
    assert!((45..=70).contains(&span), "span {span}");
}

#[test]
fn pgm_masks_load_with_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mask.pgm");
    let mut samples = vec![0u8; 16 * 16];
    samples[3] = 128;
    samples[4] = 127;
    samples[200] = 255;
    write_pgm8(&path, 16, 16, &samples).unwrap();
    let mask = ObjectMask::from_pgm(&path, 16).unwrap();
    assert_eq!(mask.nonzero_count(), 2);
    assert_eq!(mask.reflectance()[3], 1.0);
    assert_eq!(mask.reflectance()[4], 0.0);
    assert!(matches!(ObjectMask::from_pgm(&path, 32), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn uniform_mask_outputs_are_mirror_images() {
    let grid = SimulationGrid::new(64, 20e-6, LAMBDA).unwrap();
    let mask = builtin_object("uniform", 64, 1.0).unwrap();
    let sim = FrameSimulator::new(grid, SourceSpec::default(), mask, layout_with(1.6e-3), TurbulenceSpec::none()).unwrap();
    for k in 0..3 {
        let (a, b) = sim.simulate(9, k).unwrap();
        let to_frame = |v: Vec<f64>| Frame::new(64, 64, v.iter().map(|x| (x * 1000.0) as u16).collect()).unwrap();
        let (ia, ib) = (a.intensity(), b.intensity());
        assert_eq!(to_frame(ia.clone()), unflip(&to_frame(ib.clone())));
        for r in 0..64 {
            for c in 0..64 {
                assert_eq!(ia[r * 64 + c], ib[r * 64 + 63 - c]);
            }
        }
    }
}

#[test]
fn point_object_mean_image_sits_at_minus_mu_rho() {
    let n = 64;
    let pitch = 20e-6;
    let grid = SimulationGrid::new(n, pitch, LAMBDA).unwrap();
    let (dx, dy) = (10i64, -6i64);
    let mask = BuiltinObject::Point { dx, dy }.render(n, 1.0).unwrap();
    let sim = FrameSimulator::new(grid, SourceSpec::default(), mask, layout_with(1.6e-3), TurbulenceSpec::none()).unwrap();
    let frames = 5000;
    let mut mean = vec![0.0; n * n];
    for k in 0..frames {
        let (a, _) = sim.simulate(2, k).unwrap();
        mean.iter_mut().zip(a.intensity()).for_each(|(m, v)| *m += v);
    }
    let (cx, cy) = Image::new(n, n, mean).unwrap().centroid().unwrap();
    // The detector pixel j sits at (j − n/2)·μ·pitch, so −μρ_o lands at n/2 − offset.
    let mu = sim.imaging().magnification();
    let expect_x = (n / 2) as f64 - dx as f64;
    let expect_y = (n / 2) as f64 - dy as f64;
    assert!((cx - expect_x).abs() < 1.0, "cx {cx} vs {expect_x}");
    assert!((cy - expect_y).abs() < 1.0, "cy {cy} vs {expect_y}");
    assert!((mu - 0.4286 / 0.6).abs() < 1e-12);
}

#[test]
fn zero_reflectance_gives_dark_outputs() {
    let grid = SimulationGrid::new(32, 20e-6, LAMBDA).unwrap();
    let mask = ObjectMask::new(32, 32, vec![0.0; 1024]).unwrap();
    let out = tpi_core::scene::simulate_frame(
        grid,
        &SourceSpec::default(),
        &mask,
        &OpticalLayout::experiment_default(),
        &TurbulenceSpec::none(),
        1,
        0,
    )
    .unwrap();
    assert_eq!(total_power(&out.0) + total_power(&out.1), 0.0);
}

#[test]
fn thermal_intensity_statistics() {
    let grid = SimulationGrid::new(32, 20e-6, LAMBDA).unwrap();
    let mask = builtin_object("uniform", 32, 1.0).unwrap();
    let sim = FrameSimulator::new(grid, SourceSpec::default(), mask, layout_with(1.6e-3), TurbulenceSpec::none()).unwrap();
    let frames = 10_000;
    let probes = [(16usize, 16usize), (5, 20), (28, 3)];
    let mut s1 = [0.0; 3];
    let mut s2 = [0.0; 3];
    let mut lagged = [0.0; 3];
    let mut prev = [0.0; 3];
    for k in 0..frames {
        let (a, _) = sim.simulate(4, k).unwrap();
        let inten = a.intensity();
        for (p, &(r, c)) in probes.iter().enumerate() {
            let v = inten[r * 32 + c];
            s1[p] += v;
            s2[p] += v * v;
            if k > 0 {
                lagged[p] += v * prev[p];
            }
            prev[p] = v;
        }
    }
    let n = frames as f64;
    for p in 0..3 {
        let m = s1[p] / n;
        let ratio = (s2[p] / n) / (m * m);
        assert!((ratio - 2.0).abs() / 2.0 < 0.05, "probe {p}: <I^2>/<I>^2 = {ratio}");
        // Lag-1 covariance over the variance should vanish within three standard errors.
        let cov = lagged[p] / (n - 1.0) - m * m;
        let var = s2[p] / n - m * m;
        assert!((cov / var).abs() < 3.0 / (n - 1.0).sqrt(), "probe {p}: lag correlation {}", cov / var);
    }
}

#[test]
fn full_path_and_synthetic_modes_agree() {
    let n = 64;
    let grid = SimulationGrid::new(n, 20e-6, LAMBDA).unwrap();
    let mut layout = layout_with(1.6e-3);
    layout.z1 = 0.04;
    let mask = builtin_object("Q", n, 0.7).unwrap();
    let mean_image = |mode: SourceMode| {
        let spec = SourceSpec {
            mode,
            ..SourceSpec::default()
        };
        let sim = FrameSimulator::new(grid, spec, mask.clone(), layout, TurbulenceSpec::none()).unwrap();
        let mut mean = vec![0.0; n * n];
        for k in 0..1000 {
            let (a, _) = sim.simulate(6, k).unwrap();
            mean.iter_mut().zip(a.intensity()).for_each(|(m, v)| *m += v);
        }
        Image::new(n, n, mean).unwrap()
    };
    let a = mean_image(SourceMode::FullPath);
    let b = mean_image(SourceMode::ObjectPlaneSynthetic);
    let score = ncc(&a, &b).unwrap();
    assert!(score >= 0.98, "mode NCC {score}");
}
