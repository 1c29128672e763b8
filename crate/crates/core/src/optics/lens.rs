//! Thin lens phase, Gaussian imaging relations, and the coherent imaging operator.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{fft2, freq_index, ifft2};
use super::field::{check_positive, ComplexField};
use crate::error::{Error, Result};

/// Multiply by exp(−ik|ρ|²/(2f)) inside a centred circular aperture, zero outside.
pub fn apply_thin_lens(field: &ComplexField, focal_length: f64, diameter: f64) -> Result<ComplexField> {
    check_positive("focal_length", focal_length)?;
    check_positive("diameter", diameter)?;
    let extent = field.extent();
    if diameter > extent * (1.0 + 1e-12) {
        return Err(Error::ApertureExceedsGrid { diameter, extent });
    }
    let n = field.n();
    let k = field.wavenumber();
    let r_max2 = (diameter / 2.0).powi(2);
    let coords: Vec<f64> = (0..n).map(|i| field.coordinate(i)).collect();
    Ok(field.map_amplitudes(|idx, a| {
        let (row, col) = (idx / n, idx % n);
        let r2 = coords[row].powi(2) + coords[col].powi(2);
        if r2 > r_max2 {
            Complex64::default()
        } else {
            a * Complex64::from_polar(1.0, -k * r2 / (2.0 * focal_length))
        }
    }))
}

/// Image distance from the Gaussian lens law 1/so + 1/si = 1/f.
pub fn image_distance(object_distance: f64, focal_length: f64) -> Result<f64> {
    check_positive("object_distance", object_distance)?;
    check_positive("focal_length", focal_length)?;
    let inv = 1.0 / focal_length - 1.0 / object_distance;
    if inv <= 0.0 {
        return Err(Error::Layout(format!(
            "object at {object_distance} m is inside the focal length {focal_length} m; no real image"
        )));
    }
    Ok(1.0 / inv)
}

/// Coherent, space-invariant imaging by a circular lens between conjugate planes.
///
/// The image field is the object field filtered by the circular pupil, whose
/// cutoff frequency is D/(2λ·so) in object-plane coordinates, then inverted
/// and resampled at the magnified pitch μ·pitch. This is the pupil-plane form
/// of `propagate(so) → thin lens → propagate(si)` and reproduces the
/// somb(πD|ρ_o + ρ_i/μ|/(λ·so)) amplitude point-spread function. Quadratic
/// phase factors that depend only on the image coordinate are dropped; they do
/// not affect intensities or equal-point correlations.
#[derive(Debug, Clone)]
pub struct ImagingSystem {
    n: usize,
    pitch: f64,
    wavelength: f64,
    object_distance: f64,
    image_distance: f64,
    diameter: f64,
    pupil: Vec<f64>,
}

const PUPIL_SUBSAMPLES: usize = 8;

impl ImagingSystem {
    pub fn new(
        n: usize,
        pitch: f64,
        wavelength: f64,
        object_distance: f64,
        image_distance: f64,
        diameter: f64,
    ) -> Result<Self> {
        super::field::check_grid(n)?;
        check_positive("pitch", pitch)?;
        check_positive("wavelength", wavelength)?;
        check_positive("object_distance", object_distance)?;
        check_positive("image_distance", image_distance)?;
        check_positive("diameter", diameter)?;
        let cutoff = diameter / (2.0 * wavelength * object_distance);
        let df = 1.0 / (n as f64 * pitch);
        let mut pupil = vec![0.0; n * n];
        for r in 0..n {
            let fy = freq_index(r, n) * df;
            for c in 0..n {
                let fx = freq_index(c, n) * df;
                pupil[r * n + c] = pupil_coverage(fx, fy, df, cutoff);
            }
        }
        Ok(Self {
            n,
            pitch,
            wavelength,
            object_distance,
            image_distance,
            diameter,
            pupil,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn magnification(&self) -> f64 {
        self.image_distance / self.object_distance
    }

    /// Pitch of the image-plane samples.
    pub fn image_pitch(&self) -> f64 {
        self.pitch * self.magnification()
    }

    /// Pupil cutoff in cycles per metre (object-plane frequency).
    pub fn cutoff_frequency(&self) -> f64 {
        self.diameter / (2.0 * self.wavelength * self.object_distance)
    }

    /// Distance across the lens aperture between neighbouring pupil samples.
    pub fn pupil_sample_spacing(&self) -> f64 {
        self.wavelength * self.object_distance / (self.n as f64 * self.pitch)
    }

    /// Area-weighted pupil transmission in FFT bin order.
    pub fn pupil(&self) -> &[f64] {
        &self.pupil
    }

    /// Image `field` (sampled on the object plane); optionally aberrate the
    /// pupil with a phase map given in FFT bin order.
    pub fn image(&self, field: &ComplexField, pupil_phase: Option<&[f64]>) -> Result<ComplexField> {
        if field.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: (self.n, self.n),
                actual: (field.n(), field.n()),
            });
        }
        let n = self.n;
        let mut data = field.amplitudes().to_vec();
        fft2(&mut data, n);
        match pupil_phase {
            Some(phase) => {
                if phase.len() != n * n {
                    return Err(Error::DimensionMismatch {
                        expected: (n, n),
                        actual: (phase.len(), 1),
                    });
                }
                for ((d, &p), &ph) in data.iter_mut().zip(&self.pupil).zip(phase) {
                    *d *= Complex64::from_polar(p, ph);
                }
            }
            None => data.iter_mut().zip(&self.pupil).for_each(|(d, &p)| *d *= p),
        }
        ifft2(&mut data, n);
        Ok(ComplexField::from_parts(n, self.image_pitch(), self.wavelength, invert(&data, n)))
    }

    /// Coherent amplitude point-spread function on the object grid, centred at index 0.
    pub fn amplitude_psf(&self) -> Vec<Complex64> {
        let mut h: Vec<Complex64> = self.pupil.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        ifft2(&mut h, self.n);
        h
    }
}

/// Point reflection about the grid centre: index i ↦ (n − i) mod n on both axes.
pub(crate) fn invert<T: Copy>(data: &[T], n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n * n);
    for r in 0..n {
        let sr = (n - r) % n;
        for c in 0..n {
            out.push(data[sr * n + (n - c) % n]);
        }
    }
    out
}

/// Fraction of the frequency cell centred at (fx, fy) lying inside the cutoff circle.
fn pupil_coverage(fx: f64, fy: f64, df: f64, cutoff: f64) -> f64 {
    let half_diag = df * std::f64::consts::FRAC_1_SQRT_2;
    let r = fx.hypot(fy);
    if r + half_diag <= cutoff {
        return 1.0;
    }
    if r - half_diag > cutoff {
        return 0.0;
    }
    let m = PUPIL_SUBSAMPLES;
    let mut inside = 0usize;
    for i in 0..m {
        let sx = fx + ((i as f64 + 0.5) / m as f64 - 0.5) * df;
        for j in 0..m {
            let sy = fy + ((j as f64 + 0.5) / m as f64 - 0.5) * df;
            if sx * sx + sy * sy <= cutoff * cutoff {
                inside += 1;
            }
        }
    }
    inside as f64 / (m * m) as f64
}

/// Wavenumber helper shared by the turbulence model.
pub fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}
