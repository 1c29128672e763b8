//! Turbulence models.
//!
//! Two models share one spec: the per-mode phase model attaches one random
//! phase to every source grain (identical in both detection arms), and the
//! phase-screen model draws a thin Kolmogorov screen from Cₙ² and path length.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::optics::fft::{fft2, freq_index};
use crate::optics::{wavenumber, ComplexField, ImagingSystem, OpticalLayout};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurbulenceModel {
    None,
    PerMode,
    PhaseScreen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refresh {
    PerFrame,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceSpec {
    pub model: TurbulenceModel,
    /// Per-mode phase standard deviation (rad).
    pub sigma_phi: f64,
    /// Refractive-index structure parameter Cₙ² (m^-2/3).
    pub cn2: f64,
    /// Turbulent path length L (m).
    pub path_length: f64,
    /// Screen distance from the object plane (m).
    pub screen_position: f64,
    pub refresh: Refresh,
}

impl Default for TurbulenceSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl TurbulenceSpec {
    pub fn none() -> Self {
        Self {
            model: TurbulenceModel::None,
            sigma_phi: 2.0,
            cn2: 1.5e-10,
            path_length: 0.20,
            screen_position: 0.50,
            refresh: Refresh::PerFrame,
        }
    }

    pub fn per_mode(sigma_phi: f64) -> Self {
        Self {
            model: TurbulenceModel::PerMode,
            sigma_phi,
            ..Self::none()
        }
    }

    pub fn phase_screen(cn2: f64, path_length: f64, screen_position: f64) -> Self {
        Self {
            model: TurbulenceModel::PhaseScreen,
            cn2,
            path_length,
            screen_position,
            ..Self::none()
        }
    }

    pub fn frozen(mut self) -> Self {
        self.refresh = Refresh::Frozen;
        self
    }

    /// `z2` is the object-to-beam-splitter distance bounding the screen position.
    pub fn validate(&self, z2: f64) -> Result<()> {
        for (name, v) in [
            ("turbulence.sigma_phi", self.sigma_phi),
            ("turbulence.cn2", self.cn2),
            ("turbulence.path_length", self.path_length),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and non-negative, got {v}")));
            }
        }
        if !(self.screen_position >= 0.0 && self.screen_position <= z2) {
            return Err(invalid(
                "turbulence.screen_position",
                format!("must lie in [0, z2 = {z2}], got {}", self.screen_position),
            ));
        }
        Ok(())
    }

    /// Frame index used for random draws, honouring frozen refresh.
    pub fn draw_index(&self, frame_index: u64) -> u64 {
        match self.refresh {
            Refresh::PerFrame => frame_index,
            Refresh::Frozen => 0,
        }
    }
}

/// I.i.d. zero-mean Gaussian phases with standard deviation `sigma_phi`.
pub fn per_mode_phases(n_modes: usize, sigma_phi: f64, seed: u64, frame_index: u64) -> Vec<f64> {
    if sigma_phi == 0.0 {
        return vec![0.0; n_modes];
    }
    let mut rng = stream_rng(seed, Stream::TurbulenceModes, frame_index);
    (0..n_modes)
        .map(|_| sigma_phi * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Number of grain cells along one side of an `n`-pixel grid.
pub fn cells_per_side(n: usize, grain: usize) -> usize {
    n.div_ceil(grain)
}

/// Multiply each `grain × grain` cell by its own phase factor.
pub fn apply_per_mode(field: &ComplexField, grain: usize, phases: &[f64]) -> ComplexField {
    let n = field.n();
    let cells = cells_per_side(n, grain);
    assert_eq!(phases.len(), cells * cells, "one phase per grain cell");
    let factors: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    field.map_amplitudes(|idx, a| {
        let (r, c) = (idx / n, idx % n);
        a * factors[(r / grain) * cells + c / grain]
    })
}

/// Multiply the field by exp(iφ(ρ)) with φ sampled on the same grid.
pub fn apply_phase(field: &ComplexField, phase: &[f64]) -> ComplexField {
    assert_eq!(phase.len(), field.n() * field.n(), "phase map must match the field grid");
    field.map_amplitudes(|idx, a| a * Complex64::from_polar(1.0, phase[idx]))
}

/// Apply `spec` to a field: per-mode phases over grain cells, or a screen on
/// the field's own grid. `model = None` returns the input unchanged.
pub fn apply_turbulence(
    field: &ComplexField,
    spec: &TurbulenceSpec,
    grain: usize,
    seed: u64,
    frame_index: u64,
) -> Result<ComplexField> {
    let draw = spec.draw_index(frame_index);
    match spec.model {
        TurbulenceModel::None => Ok(field.clone()),
        TurbulenceModel::PerMode => {
            let cells = cells_per_side(field.n(), grain);
            let phases = per_mode_phases(cells * cells, spec.sigma_phi, seed, draw);
            Ok(apply_per_mode(field, grain, &phases))
        }
        TurbulenceModel::PhaseScreen => {
            if spec.cn2 == 0.0 || spec.path_length == 0.0 {
                return Ok(field.clone());
            }
            let screen = make_phase_screen(
                spec.cn2,
                spec.path_length,
                field.n(),
                field.pitch(),
                field.wavelength(),
                seed,
                draw,
            )?;
            Ok(apply_phase(field, &screen))
        }
    }
}

/// Fried parameter r₀ = (0.423·k²·Cₙ²·L)^(−3/5) for a uniform path.
pub fn fried_parameter(cn2: f64, path_length: f64, wavelength: f64) -> f64 {
    let k = wavenumber(wavelength);
    (0.423 * k * k * cn2 * path_length).powf(-0.6)
}

/// Kolmogorov phase power spectral density coefficient, per (cycles/m)^(−11/3).
fn psd_coefficient(r0: f64) -> f64 {
    0.023 * r0.powf(-5.0 / 3.0)
}

/// Bins within this many steps of the origin use moment-matched spectral weights.
const NEAR_ORIGIN: i64 = 4;
const SUBHARMONIC_LEVELS: u32 = 10;

/// Dimensionless spectral weight of the unit cell centred at `(i, j)`.
///
/// Near the origin the κ^(−11/3) spectrum varies too fast across one cell for
/// a point sample, so these cells carry ⟨|u|^(−5/3)⟩_cell / |u_c|², which
/// matches the cell's contribution to the small-separation structure function.
fn cell_weight(i: i64, j: i64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let side = (2 * NEAR_ORIGIN + 1) as usize;
    if i.abs() > NEAR_ORIGIN || j.abs() > NEAR_ORIGIN {
        return ((i * i + j * j) as f64).powf(-11.0 / 6.0);
    }
    let table = TABLE.get_or_init(|| {
        const SUB: usize = 32;
        let mut t = vec![0.0; side * side];
        for a in -NEAR_ORIGIN..=NEAR_ORIGIN {
            for b in -NEAR_ORIGIN..=NEAR_ORIGIN {
                if a == 0 && b == 0 {
                    continue;
                }
                let mut acc = 0.0;
                for p in 0..SUB {
                    let ux = a as f64 + (p as f64 + 0.5) / SUB as f64 - 0.5;
                    for q in 0..SUB {
                        let uy = b as f64 + (q as f64 + 0.5) / SUB as f64 - 0.5;
                        acc += (ux * ux + uy * uy).powf(-5.0 / 6.0);
                    }
                }
                let mean = acc / (SUB * SUB) as f64;
                let idx = (a + NEAR_ORIGIN) as usize * side + (b + NEAR_ORIGIN) as usize;
                t[idx] = mean / (a * a + b * b) as f64;
            }
        }
        t
    });
    table[(i + NEAR_ORIGIN) as usize * side + (j + NEAR_ORIGIN) as usize]
}

fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random Kolmogorov phase screen (radians), row-major, piston removed.
///
/// Spectral filtering of white Gaussian noise with Φ(f) = 0.023·r₀^(−5/3)·f^(−11/3)
/// (f in cycles/m), plus ten levels of 3×3 subharmonics for the low
/// frequencies the grid cannot represent.
pub fn make_phase_screen(
    cn2: f64,
    path_length: f64,
    n: usize,
    pitch: f64,
    wavelength: f64,
    seed: u64,
    frame_index: u64,
) -> Result<Vec<f64>> {
    crate::optics::check_grid(n)?;
    crate::optics::check_positive("pitch", pitch)?;
    crate::optics::check_positive("wavelength", wavelength)?;
    if !(cn2 >= 0.0 && path_length >= 0.0) {
        return Err(invalid("cn2", "Cn2 and path length must be non-negative"));
    }
    if cn2 == 0.0 || path_length == 0.0 {
        return Ok(vec![0.0; n * n]);
    }
    let r0 = fried_parameter(cn2, path_length, wavelength);
    let coeff = psd_coefficient(r0);
    let df = 1.0 / (n as f64 * pitch);

    let mut rng = stream_rng(seed, Stream::TurbulenceScreen, frame_index);
    let amp_scale = (coeff * df.powf(-5.0 / 3.0)).sqrt();
    let mut spectrum = vec![Complex64::default(); n * n];
    for r in 0..n {
        let j = freq_index(r, n) as i64;
        for c in 0..n {
            let i = freq_index(c, n) as i64;
            if i == 0 && j == 0 {
                continue;
            }
            spectrum[r * n + c] = complex_normal(&mut rng) * (amp_scale * cell_weight(i, j).sqrt());
        }
    }
    fft2(&mut spectrum, n);
    let mut phase: Vec<f64> = spectrum.iter().map(|v| v.re).collect();

    let mut sub_rng = stream_rng(seed, Stream::Subharmonics, frame_index);
    let coords: Vec<f64> = (0..n).map(|i| (i as f64 - (n / 2) as f64) * pitch).collect();
    let mut low = vec![Complex64::default(); n * n];
    for level in 1..=SUBHARMONIC_LEVELS {
        let dfp = df / 3f64.powi(level as i32);
        let amp = (coeff * dfp.powf(-5.0 / 3.0)).sqrt();
        for j in -1i64..=1 {
            for i in -1i64..=1 {
                if i == 0 && j == 0 {
                    continue;
                }
                let cn = complex_normal(&mut sub_rng) * (amp * cell_weight(i, j).sqrt());
                let (fx, fy) = (i as f64 * dfp, j as f64 * dfp);
                let col: Vec<Complex64> =
                    coords.iter().map(|&x| Complex64::from_polar(1.0, 2.0 * PI * fx * x)).collect();
                for (r, &y) in coords.iter().enumerate() {
                    let row_factor = cn * Complex64::from_polar(1.0, 2.0 * PI * fy * y);
                    for (l, &cf) in low[r * n..(r + 1) * n].iter_mut().zip(&col) {
                        *l += row_factor * cf;
                    }
                }
            }
        }
    }
    phase.iter_mut().zip(&low).for_each(|(p, l)| *p += l.re);

    let mean = phase.iter().sum::<f64>() / (n * n) as f64;
    phase.iter_mut().for_each(|p| *p -= mean);
    Ok(phase)
}

/// Fraction of the lens aperture footprint seen by a screen at `screen_position`.
///
/// The light cone from an object point fills the lens at `so` and collapses to
/// the image point at `so + si`, so a screen's footprint scales linearly along it.
pub fn footprint_fraction(layout: &OpticalLayout, screen_position: f64) -> f64 {
    if screen_position <= layout.so {
        screen_position / layout.so
    } else {
        (1.0 - (screen_position - layout.so) / layout.si).max(0.0)
    }
}

/// Phase-screen aberration of the imaging pupil, in FFT bin order.
///
/// The screen is sampled where each pupil frequency crosses it for an on-axis
/// object point (isoplanatic approximation).
pub fn pupil_screen(
    spec: &TurbulenceSpec,
    imaging: &ImagingSystem,
    layout: &OpticalLayout,
    wavelength: f64,
    seed: u64,
    frame_index: u64,
) -> Result<Option<Vec<f64>>> {
    if spec.model != TurbulenceModel::PhaseScreen || spec.cn2 == 0.0 || spec.path_length == 0.0 {
        return Ok(None);
    }
    let fraction = footprint_fraction(layout, spec.screen_position);
    if fraction <= 0.0 {
        return Ok(None);
    }
    let n = imaging.n();
    let pitch = imaging.pupil_sample_spacing() * fraction;
    let centred = make_phase_screen(
        spec.cn2,
        spec.path_length,
        n,
        pitch,
        wavelength,
        seed,
        spec.draw_index(frame_index),
    )?;
    // Centred screen index m ↔ frequency bin (m − n/2) mod n.
    let mut binned = vec![0.0; n * n];
    let h = n / 2;
    for r in 0..n {
        for c in 0..n {
            binned[((r + h) % n) * n + (c + h) % n] = centred[r * n + c];
        }
    }
    Ok(Some(binned))
}
