use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// A sampled monochromatic scalar field on a square grid.
///
/// Amplitudes are stored row-major; pixel `(row, col)` sits at transverse
/// position `((col - n/2) * pitch, (row - n/2) * pitch)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    n: usize,
    pitch: f64,
    wavelength: f64,
    amplitudes: Vec<Complex64>,
}

pub(crate) fn check_grid(n: usize) -> Result<()> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(invalid(name, format!("must be finite and positive, got {value}")));
    }
    Ok(())
}

impl ComplexField {
    /// Wrap an amplitude buffer, validating grid size, pitch, wavelength and finiteness.
    pub fn from_amplitudes(
        n: usize,
        pitch: f64,
        wavelength: f64,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        check_grid(n)?;
        check_positive("pitch", pitch)?;
        check_positive("wavelength", wavelength)?;
        if amplitudes.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                actual: (amplitudes.len(), 1),
            });
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(invalid("amplitudes", "all amplitudes must be finite"));
        }
        Ok(Self {
            n,
            pitch,
            wavelength,
            amplitudes,
        })
    }

    /// Construction for buffers produced by this crate's own transforms.
    pub(crate) fn from_parts(n: usize, pitch: f64, wavelength: f64, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), n * n);
        Self {
            n,
            pitch,
            wavelength,
            amplitudes,
        }
    }

    pub fn zeros(n: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        Self::from_amplitudes(n, pitch, wavelength, vec![Complex64::default(); n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn height(&self) -> usize {
        self.n
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Physical side length of the grid.
    pub fn extent(&self) -> f64 {
        self.n as f64 * self.pitch
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.amplitudes[row * self.n + col]
    }

    /// Transverse coordinate of column or row index `i`.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.pitch
    }

    /// Per-pixel |E|².
    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn map_amplitudes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| f(i, a))
            .collect();
        Self::from_parts(self.n, self.pitch, self.wavelength, amplitudes)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map_amplitudes(|_, a| a * factor)
    }

    /// Σ|E|²·pitch².
    pub fn total_power(&self) -> f64 {
        total_power(self)
    }
}

/// Uniform field of the given amplitude.
pub fn new_plane_wave(n: usize, pitch: f64, wavelength: f64, amplitude: f64) -> Result<ComplexField> {
    if !amplitude.is_finite() {
        return Err(invalid("amplitude", "must be finite"));
    }
    ComplexField::from_amplitudes(
        n,
        pitch,
        wavelength,
        vec![Complex64::new(amplitude, 0.0); n * n],
    )
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Σ|amplitude|²·pitch² with compensated summation.
pub fn total_power(field: &ComplexField) -> f64 {
    compensated_sum(field.amplitudes.iter().map(|a| a.norm_sqr())) * field.pitch * field.pitch
}
