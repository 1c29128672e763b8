use num_complex::Complex64;
use proptest::prelude::*;
use tpi_core::optics::fft::{fft2, ifft2};
use tpi_core::optics::{
    apply_thin_lens, beam_split, image_distance, new_plane_wave, propagate, total_power, validate_layout,
    ComplexField, ImagingSystem, OpticalLayout,
};
use tpi_core::Error;

const LAMBDA: f64 = 532e-9;

fn gaussian(n: usize, pitch: f64, w0: f64, x0: f64, y0: f64) -> ComplexField {
    let h = (n / 2) as f64;
    let amps = (0..n * n)
        .map(|i| {
            let x = ((i % n) as f64 - h) * pitch - x0;
            let y = ((i / n) as f64 - h) * pitch - y0;
            Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)
        })
        .collect();
    ComplexField::from_amplitudes(n, pitch, LAMBDA, amps).unwrap()
}

fn second_moment_radius(field: &ComplexField) -> f64 {
    let n = field.n();
    let inten = field.intensity();
    let (mut s, mut sxx) = (0.0, 0.0);
    for (i, &v) in inten.iter().enumerate() {
        let x = field.coordinate(i % n);
        let y = field.coordinate(i / n);
        s += v;
        sxx += v * (x * x + y * y);
    }
    // For I ∝ exp(−2r²/w²): ⟨r²⟩ = w²/2.
    (2.0 * sxx / s).sqrt()
}

fn rel_l2(a: &ComplexField, b: &ComplexField) -> f64 {
    let num: f64 = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.amplitudes().iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// Smooth random field whose spectrum is confined well inside the propagating band.
fn band_limited(n: usize, pitch: f64, seed: u64) -> ComplexField {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut spec = vec![Complex64::default(); n * n];
    let k = (n / 8) as i64;
    for r in 0..n {
        for c in 0..n {
            let fr = if r < n / 2 { r as i64 } else { r as i64 - n as i64 };
            let fc = if c < n / 2 { c as i64 } else { c as i64 - n as i64 };
            if fr.abs() < k && fc.abs() < k {
                spec[r * n + c] = Complex64::new(next(), next());
            }
        }
    }
    ifft2(&mut spec, n);
    ComplexField::from_amplitudes(n, pitch, LAMBDA, spec).unwrap()
}

#[test]
fn gaussian_beam_width_follows_diffraction_law() {
    let (n, pitch, w0, z) = (256, 10e-6, 80e-6, 0.045);
    let beam = gaussian(n, pitch, w0, 0.0, 0.0);
    assert!((second_moment_radius(&beam) - w0).abs() / w0 < 1e-3);
    let out = propagate(&beam, z).unwrap();
    let zr = std::f64::consts::PI * w0 * w0 / LAMBDA;
    let expected = w0 * (1.0 + (z / zr).powi(2)).sqrt();
    let measured = second_moment_radius(&out);
    assert!((measured - expected).abs() / expected < 0.02, "w(z) = {measured}, expected {expected}");
}

#[test]
fn plane_wave_constructor_and_power() {
    let f = new_plane_wave(64, 10e-6, LAMBDA, 1.0).unwrap();
    assert!((total_power(&f) - 4.096e-7).abs() < 1e-21);
    let zero = new_plane_wave(64, 10e-6, LAMBDA, 0.0).unwrap();
    assert_eq!(total_power(&zero), 0.0);
    assert!(matches!(new_plane_wave(50, 10e-6, LAMBDA, 1.0), Err(Error::InvalidDimension(50))));
    assert!(matches!(new_plane_wave(8, 10e-6, LAMBDA, 1.0), Err(Error::InvalidDimension(8))));
}

/// Double-double (TwoSum) accumulation as an extended-precision reference.
fn extended_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for v in values {
        let s = hi + v;
        let bp = s - hi;
        let err = (hi - (s - bp)) + (v - bp);
        hi = s;
        lo += err;
    }
    hi + lo
}

#[test]
fn total_power_matches_extended_precision() {
    let f = band_limited(128, 7e-6, 99);
    let reference = extended_sum(f.amplitudes().iter().map(|a| a.norm_sqr())) * 7e-6 * 7e-6;
    assert!((total_power(&f) - reference).abs() / reference < 1e-12);
}

#[test]
fn propagation_aliasing_is_an_error() {
    let f = new_plane_wave(64, 10e-6, LAMBDA, 1.0).unwrap();
    assert!(matches!(propagate(&f, 1.0), Err(Error::Aliasing { .. })));
}

#[test]
fn composition_and_reciprocity() {
    let f = band_limited(128, 20e-6, 3);
    let (a, b) = (0.03, 0.05);
    let two_step = propagate(&propagate(&f, a).unwrap(), b).unwrap();
    let one_step = propagate(&f, a + b).unwrap();
    assert!(rel_l2(&two_step, &one_step) < 1e-8);
    let back = propagate(&propagate(&f, 0.09).unwrap(), -0.09).unwrap();
    assert!(rel_l2(&back, &f) < 1e-8);
}

#[test]
fn thin_lens_geometry_of_the_experiment() {
    let si = image_distance(0.60, 0.25).unwrap();
    assert!((si - 0.428_571_428_571_428_6).abs() < 1e-15);
    assert!((si - 0.4286).abs() < 5e-5);
    let layout = OpticalLayout::experiment_default();
    validate_layout(&layout).unwrap();
    assert!((layout.magnification() - 0.4286 / 0.6).abs() < 1e-12);
}

/// Direct Fresnel chain: point → propagate(so) → lens → propagate(z).
fn direct_image(obj_offset_px: i64, z: f64) -> ComplexField {
    let (n, pitch) = (256, 40e-6);
    let mut amps = vec![Complex64::default(); n * n];
    let c = (n / 2) as i64;
    amps[(c * n as i64 + c + obj_offset_px) as usize] = Complex64::new(1.0, 0.0);
    let point = ComplexField::from_amplitudes(n, pitch, LAMBDA, amps).unwrap();
    let at_lens = propagate(&point, 0.60).unwrap();
    let after = apply_thin_lens(&at_lens, 0.25, 3e-3).unwrap();
    propagate(&after, z).unwrap()
}

fn centroid_x(field: &ComplexField) -> f64 {
    let n = field.n();
    let inten = field.intensity();
    let s: f64 = inten.iter().sum();
    inten.iter().enumerate().map(|(i, v)| v * field.coordinate(i % n)).sum::<f64>() / s
}

#[test]
fn direct_lens_chain_focuses_at_the_thin_lens_image_distance() {
    let peak = |z: f64| direct_image(0, z).intensity().iter().cloned().fold(0.0, f64::max);
    let zs: Vec<f64> = (0..=20).map(|i| 0.39 + 0.004 * i as f64).collect();
    let best = zs.iter().cloned().max_by(|a, b| peak(*a).total_cmp(&peak(*b))).unwrap();
    assert!((best - 0.4286).abs() <= 0.012, "best focus at {best}");
    let on_axis = direct_image(0, 0.4286);
    assert!(centroid_x(&on_axis).abs() < 40e-6);
}

#[test]
fn direct_lens_chain_inverts_off_axis_points() {
    let mu = 0.4286 / 0.60;
    for offset in [-10i64, 6, 12] {
        let rho_o = offset as f64 * 40e-6;
        let img = direct_image(offset, 0.4286);
        let x = centroid_x(&img);
        assert!((x + mu * rho_o).abs() < 40e-6, "offset {offset}: centroid {x}, expected {}", -mu * rho_o);
    }
}

#[test]
fn weak_lens_filling_the_grid_is_identity() {
    let f = band_limited(64, 10e-6, 5);
    let out = apply_thin_lens(&f, 1e12, f.extent()).unwrap();
    let n = 64;
    for r in 0..n {
        for c in 0..n {
            let (x, y) = (f.coordinate(c), f.coordinate(r));
            if x.hypot(y) < 0.5 * f.extent() - 1e-9 {
                assert!((out.get(r, c) - f.get(r, c)).norm() < 1e-9 * f.get(r, c).norm().max(1.0));
            }
        }
    }
}

#[test]
fn pupil_imaging_places_points_at_minus_mu_rho() {
    let (n, pitch) = (64, 20e-6);
    let sys = ImagingSystem::new(n, pitch, LAMBDA, 0.60, 0.4286, 1.6e-3).unwrap();
    let mu = sys.magnification();
    for (dx, dy) in [(0i64, 0i64), (7, 0), (-5, 9)] {
        let mut amps = vec![Complex64::default(); n * n];
        amps[((32 + dy) * 64 + 32 + dx) as usize] = Complex64::new(1.0, 0.0);
        let obj = ComplexField::from_amplitudes(n, pitch, LAMBDA, amps).unwrap();
        let img = sys.image(&obj, None).unwrap();
        let inten = img.intensity();
        let s: f64 = inten.iter().sum();
        let cx = inten.iter().enumerate().map(|(i, v)| v * img.coordinate(i % n)).sum::<f64>() / s;
        let cy = inten.iter().enumerate().map(|(i, v)| v * img.coordinate(i / n)).sum::<f64>() / s;
        let pix = sys.image_pitch();
        assert!((cx + mu * dx as f64 * pitch).abs() < pix);
        assert!((cy + mu * dy as f64 * pitch).abs() < pix);
    }
}

#[test]
fn beam_splitter_halves_power_and_mirrors() {
    let mut amps = vec![Complex64::default(); 32 * 32];
    amps[5 * 32 + 3] = Complex64::new(2.0, 1.0);
    amps[20 * 32 + 11] = Complex64::new(-1.0, 0.5);
    let f = ComplexField::from_amplitudes(32, 1e-5, LAMBDA, amps).unwrap();
    let (t, r) = beam_split(&f);
    let p = total_power(&f);
    assert!((total_power(&t) - p / 2.0).abs() <= 4.0 * f64::EPSILON * p);
    assert!((total_power(&t) + total_power(&r) - p).abs() <= 4.0 * f64::EPSILON * p);
    let (it, ir) = (t.intensity(), r.intensity());
    for row in 0..32 {
        for c in 0..32 {
            assert_eq!(ir[row * 32 + c], it[row * 32 + 31 - c]);
        }
    }
    let (z1, z2) = beam_split(&ComplexField::zeros(32, 1e-5, LAMBDA).unwrap());
    assert_eq!(total_power(&z1) + total_power(&z2), 0.0);
}

#[test]
fn fft_round_trip() {
    let f = band_limited(32, 1e-5, 8);
    let mut d = f.amplitudes().to_vec();
    fft2(&mut d, 32);
    ifft2(&mut d, 32);
    for (a, b) in d.iter().zip(f.amplitudes()) {
        assert!((a - b).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn propagation_conserves_power(seed in any::<u64>(), z in -0.045f64..0.045) {
        let f = band_limited(64, 20e-6, seed);
        let out = propagate(&f, z).unwrap();
        let (p0, p1) = (total_power(&f), total_power(&out));
        prop_assert!((p1 - p0).abs() / p0 <= 1e-10);
    }

    #[test]
    fn beam_split_conserves_power(seed in any::<u64>()) {
        let f = band_limited(32, 10e-6, seed);
        let (t, r) = beam_split(&f);
        let p = total_power(&f);
        prop_assert!((total_power(&t) + total_power(&r) - p).abs() <= 4.0 * f64::EPSILON * p);
    }

    #[test]
    fn pupil_imaging_never_gains_power(seed in any::<u64>(), d_mm in 0.2f64..3.0) {
        let f = band_limited(32, 20e-6, seed);
        let sys = ImagingSystem::new(32, 20e-6, LAMBDA, 0.6, 0.4286, d_mm * 1e-3).unwrap();
        let img = sys.image(&f, None).unwrap();
        let sum_in: f64 = f.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        let sum_out: f64 = img.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        prop_assert!(sum_out <= sum_in * (1.0 + 1e-12));
    }
}
