use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::object::{apply_object, ObjectMask};
use super::source::{generate_source_frame, SourceMode, SourceSpec};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::optics::fft::{fft2, ifft2};
use crate::optics::{
    beam_split, check_sampling, invert, propagate, validate_layout, ComplexField, ImagingSystem,
    OpticalLayout,
};
use crate::rng::{stream_rng, Stream};
use crate::turbulence::{apply_turbulence, pupil_screen, TurbulenceModel, TurbulenceSpec};

/// Object-plane sampling shared by every field of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationGrid {
    pub n: usize,
    /// Object-plane pixel pitch (m).
    pub pitch: f64,
    pub wavelength: f64,
}

impl SimulationGrid {
    pub fn new(n: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        crate::optics::check_grid(n)?;
        crate::optics::check_positive("pitch", pitch)?;
        crate::optics::check_positive("wavelength", wavelength)?;
        Ok(Self { n, pitch, wavelength })
    }
}

/// End-to-end frame generator with its photon calibration precomputed.
///
/// Each frame runs source → (z1) → turbulence modes → object → imaging
/// (with an optional pupil-plane phase screen) → beam splitter. Output fields
/// are scaled so that the mean camera-1 image peaks at `mean_photons`.
#[derive(Debug, Clone)]
pub struct FrameSimulator {
    grid: SimulationGrid,
    source: SourceSpec,
    mask: ObjectMask,
    layout: OpticalLayout,
    turbulence: TurbulenceSpec,
    imaging: ImagingSystem,
    expected: Image,
    amplitude_scale: f64,
}

impl FrameSimulator {
    pub fn new(
        grid: SimulationGrid,
        source: SourceSpec,
        mask: ObjectMask,
        layout: OpticalLayout,
        turbulence: TurbulenceSpec,
    ) -> Result<Self> {
        source.validate()?;
        validate_layout(&layout)?;
        turbulence.validate(layout.z2)?;
        if mask.width() != grid.n || mask.height() != grid.n {
            return Err(Error::DimensionMismatch {
                expected: (grid.n, grid.n),
                actual: (mask.width(), mask.height()),
            });
        }
        if source.mode == SourceMode::FullPath {
            check_sampling(grid.n, grid.pitch, grid.wavelength, layout.z1)?;
        }
        let imaging = ImagingSystem::new(
            grid.n,
            grid.pitch,
            grid.wavelength,
            layout.so,
            layout.si,
            layout.lens_diameter,
        )?;
        let raw = expected_image_intensity(&imaging, &mask, &source, grid.n);
        let peak = raw.iter().cloned().fold(0.0, f64::max);
        let amplitude_scale = if peak > 0.0 {
            (source.mean_photons / (0.5 * peak)).sqrt()
        } else {
            1.0
        };
        let expected = Image::new(
            grid.n,
            grid.n,
            raw.iter().map(|&v| 0.5 * v * amplitude_scale * amplitude_scale).collect(),
        )?;
        Ok(Self {
            grid,
            source,
            mask,
            layout,
            turbulence,
            imaging,
            expected,
            amplitude_scale,
        })
    }

    pub fn grid(&self) -> &SimulationGrid {
        &self.grid
    }

    pub fn source(&self) -> &SourceSpec {
        &self.source
    }

    pub fn mask(&self) -> &ObjectMask {
        &self.mask
    }

    pub fn layout(&self) -> &OpticalLayout {
        &self.layout
    }

    pub fn turbulence(&self) -> &TurbulenceSpec {
        &self.turbulence
    }

    pub fn imaging(&self) -> &ImagingSystem {
        &self.imaging
    }

    /// Exact ensemble-mean camera-1 intensity without turbulence, in photons.
    pub fn expected_intensity(&self) -> &Image {
        &self.expected
    }

    pub fn amplitude_scale(&self) -> f64 {
        self.amplitude_scale
    }

    /// Object-plane field for one frame, after per-mode turbulence and the object.
    pub fn object_field(&self, master_seed: u64, frame_index: u64) -> Result<ComplexField> {
        let g = self.grid;
        let source = generate_source_frame(&self.source, g.n, g.pitch, g.wavelength, master_seed, frame_index)?;
        let mut field = if self.turbulence.model == TurbulenceModel::PerMode {
            apply_turbulence(&source, &self.turbulence, self.source.grain, master_seed, frame_index)?
        } else {
            source
        };
        if self.source.mode == SourceMode::FullPath {
            field = propagate(&field, self.layout.z1)?;
        }
        let mut out = apply_object(&field, &self.mask)?;
        if self.mask.is_diffuse() {
            let mut rng = stream_rng(master_seed, Stream::ObjectPhase, frame_index);
            let phases: Vec<f64> = (0..g.n * g.n).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
            out = out.map_amplitudes(|i, a| a * Complex64::from_polar(1.0, phases[i]));
        }
        Ok(out)
    }

    /// Image-plane field (before the beam splitter), photon-calibrated.
    pub fn image_field(&self, master_seed: u64, frame_index: u64) -> Result<ComplexField> {
        let object = self.object_field(master_seed, frame_index)?;
        let screen = pupil_screen(
            &self.turbulence,
            &self.imaging,
            &self.layout,
            self.grid.wavelength,
            master_seed,
            frame_index,
        )?;
        let image = self.imaging.image(&object, screen.as_deref())?;
        Ok(image.scaled(Complex64::new(self.amplitude_scale, 0.0)))
    }

    /// The `(camera 1, camera 2)` fields for one frame; camera 2 is mirrored.
    pub fn simulate(&self, master_seed: u64, frame_index: u64) -> Result<(ComplexField, ComplexField)> {
        Ok(beam_split(&self.image_field(master_seed, frame_index)?))
    }
}

/// One-shot convenience wrapper around [`FrameSimulator`].
pub fn simulate_frame(
    grid: SimulationGrid,
    spec: &SourceSpec,
    mask: &ObjectMask,
    layout: &OpticalLayout,
    turbulence: &TurbulenceSpec,
    master_seed: u64,
    frame_index: u64,
) -> Result<(ComplexField, ComplexField)> {
    FrameSimulator::new(grid, *spec, mask.clone(), *layout, *turbulence)?.simulate(master_seed, frame_index)
}

/// Source-field correlation ⟨E(ρ)E*(ρ+d)⟩ for offset `d`, or `None` when it vanishes everywhere.
fn source_correlation(spec: &SourceSpec, n: usize, dx: i64, dy: i64) -> Option<Vec<f64>> {
    let g = spec.grain as i64;
    if dx.abs() >= g || dy.abs() >= g {
        return None;
    }
    match spec.mode {
        SourceMode::FullPath => {
            let w = (1.0 - dx.abs() as f64 / g as f64) * (1.0 - dy.abs() as f64 / g as f64);
            Some(vec![w; n * n])
        }
        SourceMode::ObjectPlaneSynthetic => {
            let ni = n as i64;
            let mut c = vec![0.0; n * n];
            for r in 0..ni {
                let r2 = (r + dy).rem_euclid(ni);
                for col in 0..ni {
                    let c2 = (col + dx).rem_euclid(ni);
                    if r / g == r2 / g && col / g == c2 / g {
                        c[(r * ni + col) as usize] = 1.0;
                    }
                }
            }
            Some(c)
        }
    }
}

/// Ensemble-mean |U|² at the image plane (before the split), unscaled, in image pixel order.
///
/// ⟨I(x)⟩ = Σ_d Σ_ρ h(x−ρ)·h*(x−ρ−d)·T(ρ)·T*(ρ+d)·C_d(ρ), evaluated as one
/// circular convolution per source-correlation offset d.
fn expected_image_intensity(imaging: &ImagingSystem, mask: &ObjectMask, spec: &SourceSpec, n: usize) -> Vec<f64> {
    let h = imaging.amplitude_psf();
    let t = mask.amplitude_factors();
    let g = spec.grain as i64;
    let offsets: Vec<(i64, i64)> = if mask.is_diffuse() {
        vec![(0, 0)]
    } else {
        (-(g - 1)..g).flat_map(|dy| (-(g - 1)..g).map(move |dx| (dx, dy))).collect()
    };
    let ni = n as i64;
    let shift = |i: usize, dx: i64, dy: i64| -> usize {
        let (r, c) = ((i / n) as i64, (i % n) as i64);
        ((r + dy).rem_euclid(ni) * ni + (c + dx).rem_euclid(ni)) as usize
    };
    let mut total = vec![Complex64::default(); n * n];
    for (dx, dy) in offsets {
        let Some(corr) = source_correlation(spec, n, dx, dy) else {
            continue;
        };
        let mut m: Vec<Complex64> =
            (0..n * n).map(|i| t[i] * t[shift(i, dx, dy)].conj() * corr[i]).collect();
        if m.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        let mut k: Vec<Complex64> = (0..n * n).map(|i| h[i] * h[shift(i, -dx, -dy)].conj()).collect();
        fft2(&mut m, n);
        fft2(&mut k, n);
        for (a, b) in m.iter_mut().zip(&k) {
            *a *= b;
        }
        ifft2(&mut m, n);
        for (acc, v) in total.iter_mut().zip(&m) {
            *acc += v;
        }
    }
    invert(&total, n).iter().map(|v| v.re.max(0.0)).collect()
}
