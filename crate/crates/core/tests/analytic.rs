use proptest::prelude::*;
use tpi_core::analytic::{
    analytic_fwhm_pixels, bessel_j1, first_j1_zero, half_max_argument, image_coordinate, image_fwhm, predicted_classical_image,
    predicted_g1, predicted_tpi_image, somb, PsfSpec,
};
use tpi_core::metrics::ncc;
use tpi_core::scene::{builtin_object, BuiltinObject, ObjectMask};
use tpi_core::Image;

const PITCH: f64 = 20e-6;

fn psf(d: f64) -> PsfSpec {
    PsfSpec::new(532e-9, d, 0.6, 0.4286 / 0.6).unwrap()
}

#[test]
fn frozen_bessel_constants() {
    assert!((first_j1_zero() - 3.8317059702075123).abs() < 1e-12);
    assert!(bessel_j1(first_j1_zero()).abs() < 1e-14);
    let (h2, h4) = (half_max_argument(2), half_max_argument(4));
    assert!((h2 - 1.616339948).abs() < 1e-8);
    assert!((h4 - 1.160286001).abs() < 1e-8);
    assert!((h4 / h2 - 0.7178477535).abs() < 1e-9);
    assert!((somb(h2).powi(2) - 0.5).abs() < 1e-12);
    assert!((somb(h4).powi(4) - 0.5).abs() < 1e-12);
    assert_eq!(somb(0.0), 1.0);
}

#[test]
fn point_object_peaks_at_the_inverted_image_position() {
    let p = psf(1.6e-3);
    let mask = BuiltinObject::Point { dx: 7, dy: -5 }.render(64, 1.0).unwrap();
    for image in [predicted_classical_image(&mask, &p, PITCH).unwrap(), predicted_tpi_image(&mask, &p, PITCH).unwrap()] {
        assert_eq!(image.argmax(), (32 + 5, 32 - 7));
    }
    // Direct G1 kernel agrees: the image point at −μρ_o is brightest.
    let object = [7.0 * PITCH, -5.0 * PITCH];
    let rho = [-p.magnification * object[0], -p.magnification * object[1]];
    let peak = predicted_g1(&mask, &p, PITCH, rho, rho).re;
    let off = predicted_g1(&mask, &p, PITCH, [rho[0] + 2.0 * PITCH, rho[1]], [rho[0] + 2.0 * PITCH, rho[1]]).re;
    assert!(peak > off);
}

#[test]
fn uniform_object_is_flat_in_the_interior() {
    let p = psf(3.2e-3);
    let mask = builtin_object("uniform", 128, 1.0).unwrap();
    let image = predicted_classical_image(&mask, &p, PITCH).unwrap();
    let centre = image.get(64, 64);
    for r in 44..=84 {
        for c in 44..=84 {
            assert!((image.get(r, c) / centre - 1.0).abs() < 0.01, "({r},{c})");
        }
    }
}

#[test]
fn convolution_agrees_with_a_finer_direct_sum() {
    let p = psf(1.6e-3);
    let coarse = builtin_object("Q", 32, 0.9).unwrap();
    let fine = builtin_object("Q", 64, 0.9).unwrap();
    let fast = predicted_classical_image(&coarse, &p, PITCH).unwrap();
    let direct = Image::from_fn(32, 32, |r, c| {
        let rho = image_coordinate(32, PITCH, p.magnification, r, c);
        // The fine grid shares the origin and has half the pitch.
        predicted_g1(&fine, &p, PITCH / 2.0, rho, rho).re
    });
    let score = ncc(&fast, &direct).unwrap();
    assert!(score >= 0.99, "NCC {score}");
}

#[test]
fn predictions_ignore_a_reflectance_scale() {
    let p = psf(1.6e-3);
    let mask = builtin_object("Q", 64, 0.8).unwrap();
    let half = ObjectMask::new(64, 64, mask.reflectance().iter().map(|r| 0.5 * r).collect()).unwrap();
    for (a, b) in [
        (predicted_classical_image(&mask, &p, PITCH).unwrap(), predicted_classical_image(&half, &p, PITCH).unwrap()),
        (predicted_tpi_image(&mask, &p, PITCH).unwrap(), predicted_tpi_image(&half, &p, PITCH).unwrap()),
    ] {
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn fwhm_ratio_on_a_fine_grid() {
    let p = psf(1.6e-3);
    let pitch = 5e-6;
    let mask = builtin_object("point", 128, 1.0).unwrap();
    let wc = image_fwhm(&predicted_classical_image(&mask, &p, pitch).unwrap()).unwrap();
    let wt = image_fwhm(&predicted_tpi_image(&mask, &p, pitch).unwrap()).unwrap();
    assert!((wc / analytic_fwhm_pixels(&p, pitch, 2) - 1.0).abs() < 0.02);
    assert!((wt / analytic_fwhm_pixels(&p, pitch, 4) - 1.0).abs() < 0.02);
    assert!((wt / wc / 0.7178477535 - 1.0).abs() < 0.02, "ratio {}", wt / wc);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn translating_the_object_translates_the_image(dx in -6i64..=6, dy in -6i64..=6) {
        let p = psf(1.6e-3);
        let base = predicted_classical_image(&BuiltinObject::Point { dx: 0, dy: 0 }.render(64, 1.0).unwrap(), &p, PITCH).unwrap();
        let moved = predicted_classical_image(&BuiltinObject::Point { dx, dy }.render(64, 1.0).unwrap(), &p, PITCH).unwrap();
        for r in 12..52 {
            for c in 12..52 {
                let (sr, sc) = ((r as i64 - dy) as usize, (c as i64 - dx) as usize);
                prop_assert!((moved.get(sr, sc) - base.get(r, c)).abs() < 1e-9);
            }
        }
    }
}
