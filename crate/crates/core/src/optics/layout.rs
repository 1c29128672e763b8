use crate::error::{Error, Result};

/// Longitudinal geometry of the source, object, lens, beam splitter and cameras.
///
/// All distances in metres. The magnification `si/so` is always derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalLayout {
    /// Source (ground glass) to object.
    pub z1: f64,
    /// Object to beam splitter.
    pub z2: f64,
    /// Beam splitter to camera 1.
    pub z3: f64,
    /// Beam splitter to camera 2.
    pub z4: f64,
    /// Object to lens.
    pub so: f64,
    /// Lens to image plane.
    pub si: f64,
    /// Focal length.
    pub f: f64,
    /// Lens diameter D.
    pub lens_diameter: f64,
}

/// Relative tolerance on 1/so + 1/si = 1/f, as a fraction of 1/f.
pub const IMAGING_TOLERANCE: f64 = 1e-2;
/// Relative tolerance on the beam-splitter to camera path constraints.
pub const PATH_TOLERANCE: f64 = 1e-6;

impl OpticalLayout {
    /// Desk-scale layout with the experimental distances of the letter-Q setup.
    pub fn experiment_default() -> Self {
        let so = 0.60;
        let si = 0.4286;
        let z2 = 0.80;
        Self {
            z1: 1.00,
            z2,
            z3: si - (z2 - so),
            z4: si - (z2 - so),
            so,
            si,
            f: 0.25,
            lens_diameter: 0.0254,
        }
    }

    /// Build a layout whose camera arms are derived so both cameras sit on the image plane.
    pub fn with_derived_arms(z1: f64, z2: f64, so: f64, si: f64, f: f64, lens_diameter: f64) -> Self {
        let arm = si - (z2 - so);
        Self {
            z1,
            z2,
            z3: arm,
            z4: arm,
            so,
            si,
            f,
            lens_diameter,
        }
    }

    pub fn magnification(&self) -> f64 {
        self.si / self.so
    }

    /// Check positivity, the imaging condition and the camera path constraints.
    pub fn validate(&self) -> Result<()> {
        validate_layout(self)
    }
}

pub fn validate_layout(layout: &OpticalLayout) -> Result<()> {
    let named = [
        ("z1", layout.z1),
        ("z2", layout.z2),
        ("z3", layout.z3),
        ("z4", layout.z4),
        ("so", layout.so),
        ("si", layout.si),
        ("f", layout.f),
        ("lens_diameter", layout.lens_diameter),
    ];
    for (name, v) in named {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Layout(format!("{name} must be positive, got {v}")));
        }
    }
    let mismatch = (1.0 / layout.so + 1.0 / layout.si - 1.0 / layout.f).abs();
    if mismatch > IMAGING_TOLERANCE / layout.f {
        return Err(Error::Layout(format!(
            "imaging condition 1/so + 1/si = 1/f violated: |1/{} + 1/{} - 1/{}| = {mismatch:.4} 1/m",
            layout.so, layout.si, layout.f
        )));
    }
    if layout.z2 < layout.so {
        return Err(Error::Layout(format!(
            "beam splitter (z2 = {}) must sit after the lens (so = {})",
            layout.z2, layout.so
        )));
    }
    let tol = PATH_TOLERANCE * layout.si;
    for (name, arm) in [("z3", layout.z3), ("z4", layout.z4)] {
        let reach = layout.z2 - layout.so + arm;
        if (reach - layout.si).abs() > tol {
            return Err(Error::Layout(format!(
                "camera arm {name} = {arm} does not reach the image plane: (z2 - so) + {name} = {reach}, si = {}",
                layout.si
            )));
        }
    }
    Ok(())
}
