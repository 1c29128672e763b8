use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::optics::ComplexField;
use crate::rng::{stream_rng, Stream};

/// Where the chaotic field is synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceMode {
    /// Ground-glass plane, then free propagation over z1 to the object.
    FullPath,
    /// Directly at the object plane (statistically equivalent, cheaper).
    ObjectPlaneSynthetic,
}

/// Pseudothermal (rotating ground glass) source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    /// Speckle correlation length on the synthesis plane, in pixels.
    pub grain: usize,
    /// Mean photon count at the brightest classical image pixel per frame.
    pub mean_photons: f64,
    pub mode: SourceMode,
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            grain: 2,
            mean_photons: 500.0,
            mode: SourceMode::ObjectPlaneSynthetic,
        }
    }
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grain < 1 {
            return Err(invalid("source.grain", "must be at least 1"));
        }
        if !(self.mean_photons.is_finite() && self.mean_photons > 0.0) {
            return Err(invalid("source.mean_photons", "must be positive"));
        }
        Ok(())
    }
}

/// One realization of the chaotic source: an independent unit-variance
/// circular complex Gaussian per `grain × grain` cell, constant within a cell.
pub fn generate_source_frame(
    spec: &SourceSpec,
    n: usize,
    pitch: f64,
    wavelength: f64,
    master_seed: u64,
    frame_index: u64,
) -> Result<ComplexField> {
    spec.validate()?;
    crate::optics::check_grid(n)?;
    let g = spec.grain;
    let cells = n.div_ceil(g);
    let mut rng = stream_rng(master_seed, Stream::Source, frame_index);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let values: Vec<Complex64> = (0..cells * cells)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect();
    let mut amplitudes = Vec::with_capacity(n * n);
    for r in 0..n {
        let row = &values[(r / g) * cells..(r / g + 1) * cells];
        amplitudes.extend((0..n).map(|c| row[c / g]));
    }
    ComplexField::from_amplitudes(n, pitch, wavelength, amplitudes)
}
