use std::f64::consts::PI;

use num_complex::Complex64;

use super::bessel::somb;
use crate::error::{invalid, Result};
use crate::image::Image;
use crate::optics::fft::{fft2, ifft2};
use crate::scene::ObjectMask;

/// Diffraction-limited imaging parameters behind the somb point-spread function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfSpec {
    pub wavelength: f64,
    pub lens_diameter: f64,
    /// Object-to-lens distance.
    pub so: f64,
    pub magnification: f64,
}

impl PsfSpec {
    pub fn new(wavelength: f64, lens_diameter: f64, so: f64, magnification: f64) -> Result<Self> {
        let spec = Self {
            wavelength,
            lens_diameter,
            so,
            magnification,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("lens_diameter", self.lens_diameter),
            ("so", self.so),
            ("magnification", self.magnification),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// a = πD/(λ·so), the somb argument per metre of object-plane distance.
    pub fn scale(&self) -> f64 {
        PI * self.lens_diameter / (self.wavelength * self.so)
    }

    /// Amplitude PSF somb(a|ρ_o + ρ_i/μ|).
    pub fn amplitude(&self, rho_o: [f64; 2], rho_i: [f64; 2]) -> f64 {
        let dx = rho_o[0] + rho_i[0] / self.magnification;
        let dy = rho_o[1] + rho_i[1] / self.magnification;
        somb(self.scale() * dx.hypot(dy))
    }
}

/// Object-plane coordinate (x, y) of mask pixel `(row, col)` with pitch `pitch`.
pub fn object_coordinate(n: usize, pitch: f64, row: usize, col: usize) -> [f64; 2] {
    let h = (n / 2) as f64;
    [(col as f64 - h) * pitch, (row as f64 - h) * pitch]
}

/// Image-plane coordinate of detector pixel `(row, col)`; detector pitch is μ·pitch.
pub fn image_coordinate(n: usize, pitch: f64, magnification: f64, row: usize, col: usize) -> [f64; 2] {
    let [x, y] = object_coordinate(n, pitch, row, col);
    [x * magnification, y * magnification]
}

/// G₁₂⁽¹⁾(ρ₁, ρ₂) ∝ Σ_ρo |O(ρ_o)|²·somb(a|ρ_o+ρ₁/μ|)·somb(a|ρ_o+ρ₂/μ|)·pitch², by the midpoint rule.
pub fn predicted_g1(mask: &ObjectMask, psf: &PsfSpec, pitch: f64, rho1: [f64; 2], rho2: [f64; 2]) -> Complex64 {
    let n = mask.width();
    let r = mask.reflectance();
    let mut sum = 0.0;
    for row in 0..mask.height() {
        for col in 0..n {
            let w = r[row * n + col];
            if w == 0.0 {
                continue;
            }
            let rho_o = object_coordinate(n, pitch, row, col);
            sum += w * psf.amplitude(rho_o, rho1) * psf.amplitude(rho_o, rho2);
        }
    }
    Complex64::new(sum * pitch * pitch, 0.0)
}

/// Linear (zero-padded) convolution of the reflectance with `kernel(a·|Δρ|)`, sampled on the image grid.
///
/// Detector pixel j sees the object point −(j − n/2)·pitch, so the output is
/// read back from the padded convolution at object index n − j.
fn convolve_reflectance(mask: &ObjectMask, psf: &PsfSpec, pitch: f64, kernel: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = mask.width();
    let m = 2 * n;
    let ap = psf.scale() * pitch;
    let mut obj = vec![Complex64::default(); m * m];
    for row in 0..n {
        for col in 0..n {
            obj[row * m + col] = Complex64::new(mask.reflectance()[row * n + col], 0.0);
        }
    }
    let mut ker = vec![Complex64::default(); m * m];
    for row in 0..m {
        let dy = if row <= n { row as f64 } else { row as f64 - m as f64 };
        for col in 0..m {
            let dx = if col <= n { col as f64 } else { col as f64 - m as f64 };
            ker[row * m + col] = Complex64::new(kernel(ap * dx.hypot(dy)), 0.0);
        }
    }
    fft2(&mut obj, m);
    fft2(&mut ker, m);
    obj.iter_mut().zip(&ker).for_each(|(a, b)| *a *= b);
    ifft2(&mut obj, m);
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            out.push(obj[(n - j) * m + (n - i)].re * pitch * pitch);
        }
    }
    out
}

fn unit_peak(n: usize, data: Vec<f64>) -> Result<Image> {
    Image::new(n, n, data)?.unit_peak()
}

/// Diagonal G₁₂⁽¹⁾(ρ, ρ) on the detector grid, unnormalized.
pub fn predicted_g1_diagonal(mask: &ObjectMask, psf: &PsfSpec, pitch: f64) -> Result<Image> {
    psf.validate()?;
    let n = mask.width();
    Image::new(n, n, convolve_reflectance(mask, psf, pitch, |u| somb(u).powi(2)))
}

/// Incoherent (classical) image: reflectance convolved with somb², unit peak.
pub fn predicted_classical_image(mask: &ObjectMask, psf: &PsfSpec, pitch: f64) -> Result<Image> {
    let g1 = predicted_g1_diagonal(mask, psf, pitch)?;
    unit_peak(mask.width(), g1.into_data())
}

/// |G₁₂⁽¹⁾(ρ, ρ)|², unit peak.
pub fn predicted_tpi_image(mask: &ObjectMask, psf: &PsfSpec, pitch: f64) -> Result<Image> {
    let g1 = predicted_g1_diagonal(mask, psf, pitch)?;
    unit_peak(mask.width(), g1.data().iter().map(|v| v * v).collect())
}

/// The alternative form with somb² factors inside the integral before squaring:
/// (Σ |O|²·somb⁴)², unit peak. Kept to compare against the Monte Carlo.
pub fn predicted_tpi_image_squared_kernel(mask: &ObjectMask, psf: &PsfSpec, pitch: f64) -> Result<Image> {
    psf.validate()?;
    let inner = convolve_reflectance(mask, psf, pitch, |u| somb(u).powi(4));
    unit_peak(mask.width(), inner.iter().map(|v| v * v).collect())
}

/// Full width at half maximum of a sampled 1-D profile, in samples, by linear interpolation.
pub fn fwhm(profile: &[f64]) -> Option<f64> {
    let (peak_idx, &peak) = profile.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(peak > 0.0) {
        return None;
    }
    let half = 0.5 * peak;
    let mut left = None;
    for i in (0..peak_idx).rev() {
        if profile[i] < half {
            let t = (half - profile[i]) / (profile[i + 1] - profile[i]);
            left = Some(i as f64 + t);
            break;
        }
    }
    let mut right = None;
    for i in peak_idx + 1..profile.len() {
        if profile[i] < half {
            let t = (profile[i - 1] - half) / (profile[i - 1] - profile[i]);
            right = Some((i - 1) as f64 + t);
            break;
        }
    }
    Some(right? - left?)
}

/// Mean of the horizontal and vertical FWHM through the image peak, in pixels.
pub fn image_fwhm(image: &Image) -> Option<f64> {
    let (r, c) = image.argmax();
    let h = fwhm(image.row(r))?;
    let v = fwhm(&image.column(c))?;
    Some(0.5 * (h + v))
}

/// Analytic FWHM of somb^power(a·|ρ_o|), expressed in detector pixels of pitch μ·pitch.
pub fn analytic_fwhm_pixels(psf: &PsfSpec, pitch: f64, power: u32) -> f64 {
    2.0 * super::bessel::half_max_argument(power) / (psf.scale() * pitch)
}
