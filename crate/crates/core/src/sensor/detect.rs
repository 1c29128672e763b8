use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::frame::Frame;
use crate::error::{invalid, Error, Result};
use crate::optics::ComplexField;
use crate::rng::{stream_rng, Stream};

/// Largest representable count.
pub const MAX_COUNT: u16 = u16::MAX;
/// Expected counts above this fraction of [`MAX_COUNT`] are a calibration error.
pub const SATURATION_FRACTION: f64 = 0.9;
/// Above this mean, Poisson counts are drawn from the normal approximation.
pub const POISSON_NORMAL_THRESHOLD: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub shot_noise: bool,
    /// Gaussian read noise standard deviation, in counts.
    pub read_noise_sigma: f64,
    pub quantum_efficiency: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            shot_noise: true,
            read_noise_sigma: 0.0,
            quantum_efficiency: 1.0,
        }
    }
}

impl NoiseModel {
    /// No shot noise, no read noise, unit efficiency.
    pub fn ideal() -> Self {
        Self {
            shot_noise: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.read_noise_sigma.is_finite() && self.read_noise_sigma >= 0.0) {
            return Err(invalid("sensor.read_noise", "must be finite and non-negative"));
        }
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return Err(invalid("sensor.qe", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Which camera is detecting; selects an independent noise stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Camera {
    One,
    Two,
}

impl Camera {
    fn stream(self) -> Stream {
        match self {
            Camera::One => Stream::DetectorOne,
            Camera::Two => Stream::DetectorTwo,
        }
    }
}

/// Photon-count a calibrated field: expected count QE·|E|² per pixel.
pub fn detect(
    field: &ComplexField,
    noise: &NoiseModel,
    camera: Camera,
    master_seed: u64,
    frame_index: u64,
) -> Result<Frame> {
    detect_intensity(&field.intensity(), field.n(), field.n(), noise, camera, master_seed, frame_index)
}

/// [`detect`] on an intensity map already in photons.
pub fn detect_intensity(
    intensity: &[f64],
    width: usize,
    height: usize,
    noise: &NoiseModel,
    camera: Camera,
    master_seed: u64,
    frame_index: u64,
) -> Result<Frame> {
    noise.validate()?;
    if intensity.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            actual: (intensity.len(), 1),
        });
    }
    let limit = SATURATION_FRACTION * MAX_COUNT as f64;
    let qe = noise.quantum_efficiency;
    if let Some(&worst) = intensity.iter().find(|&&i| !(qe * i <= limit)) {
        return Err(Error::Saturation {
            expected: qe * worst,
            limit,
        });
    }
    let needs_rng = noise.shot_noise || noise.read_noise_sigma > 0.0;
    let mut rng = needs_rng.then(|| stream_rng(master_seed, camera.stream(), frame_index));
    let counts = intensity
        .iter()
        .map(|&i| {
            let expected = (qe * i).max(0.0);
            let mut value = match rng.as_mut() {
                Some(rng) if noise.shot_noise => sample_poisson(rng, expected),
                _ => expected.round(),
            };
            if noise.read_noise_sigma > 0.0 {
                let z: f64 = rng.as_mut().expect("rng present").sample(StandardNormal);
                value = (value + noise.read_noise_sigma * z).round();
            }
            value.clamp(0.0, MAX_COUNT as f64) as u16
        })
        .collect();
    Frame::new(width, height, counts)
}

fn sample_poisson(rng: &mut impl Rng, mean: f64) -> f64 {
    if mean <= 0.0 {
        0.0
    } else if mean > POISSON_NORMAL_THRESHOLD {
        let z: f64 = rng.sample(StandardNormal);
        (mean + mean.sqrt() * z).round().max(0.0)
    } else {
        Poisson::new(mean).expect("positive finite mean").sample(rng)
    }
}
