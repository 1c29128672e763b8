//! Band-limited angular-spectrum propagation.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{fft2, freq_index, ifft2};
use super::field::ComplexField;
use crate::error::{Error, Result};

/// λ·|z| / (N·pitch²); the transfer-function phase is adequately sampled when ≤ 1.
pub fn sampling_ratio(n: usize, pitch: f64, wavelength: f64, distance: f64) -> f64 {
    wavelength * distance.abs() / (n as f64 * pitch * pitch)
}

pub fn check_sampling(n: usize, pitch: f64, wavelength: f64, distance: f64) -> Result<()> {
    let ratio = sampling_ratio(n, pitch, wavelength, distance);
    if !ratio.is_finite() || ratio > 1.0 {
        return Err(Error::Aliasing {
            distance,
            n,
            pitch,
            ratio,
        });
    }
    Ok(())
}

/// Transfer function exp(i·kz·z) in FFT bin order, evanescent bins zeroed.
pub fn transfer_function(n: usize, pitch: f64, wavelength: f64, distance: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    let dk = 2.0 * PI / (n as f64 * pitch);
    let mut h = Vec::with_capacity(n * n);
    for r in 0..n {
        let ky = freq_index(r, n) * dk;
        for c in 0..n {
            let kx = freq_index(c, n) * dk;
            let kz2 = k * k - kx * kx - ky * ky;
            if kz2 < 0.0 {
                h.push(Complex64::default());
            } else {
                h.push(Complex64::from_polar(1.0, kz2.sqrt() * distance));
            }
        }
    }
    h
}

/// Advance `field` by `distance` metres of free space.
///
/// Errors with [`Error::Aliasing`] when λ|z|/(N·pitch²) > 1.
pub fn propagate(field: &ComplexField, distance: f64) -> Result<ComplexField> {
    if !distance.is_finite() {
        return Err(crate::error::invalid("distance", "must be finite"));
    }
    if distance == 0.0 {
        return Ok(field.clone());
    }
    let n = field.n();
    check_sampling(n, field.pitch(), field.wavelength(), distance)?;
    let h = transfer_function(n, field.pitch(), field.wavelength(), distance);
    let mut data = field.amplitudes().to_vec();
    fft2(&mut data, n);
    data.iter_mut().zip(&h).for_each(|(d, t)| *d *= t);
    ifft2(&mut data, n);
    Ok(ComplexField::from_parts(n, field.pitch(), field.wavelength(), data))
}
