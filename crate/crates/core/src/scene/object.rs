use std::path::Path;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::optics::ComplexField;

/// Object transmission/reflection function T(ρ_o).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMask {
    width: usize,
    height: usize,
    /// |O(ρ_o)|² in [0, 1].
    reflectance: Vec<f64>,
    /// Deterministic surface phase (radians).
    phase: Option<Vec<f64>>,
    /// Diffusely reflecting surface: an independent uniform random phase per
    /// pixel and frame, making the reflected field delta-correlated.
    diffuse: bool,
}

impl ObjectMask {
    pub fn new(width: usize, height: usize, reflectance: Vec<f64>) -> Result<Self> {
        if reflectance.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (reflectance.len(), 1),
            });
        }
        if reflectance.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(invalid("reflectance", "values must lie in [0, 1]"));
        }
        Ok(Self {
            width,
            height,
            reflectance,
            phase: None,
            diffuse: false,
        })
    }

    pub fn with_phase(mut self, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != self.width * self.height {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (phase.len(), 1),
            });
        }
        self.phase = Some(phase);
        Ok(self)
    }

    pub fn with_diffuse(mut self, diffuse: bool) -> Self {
        self.diffuse = diffuse;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn reflectance(&self) -> &[f64] {
        &self.reflectance
    }

    pub fn phase(&self) -> Option<&[f64]> {
        self.phase.as_deref()
    }

    pub fn is_diffuse(&self) -> bool {
        self.diffuse
    }

    pub fn mean_reflectance(&self) -> f64 {
        self.reflectance.iter().sum::<f64>() / self.reflectance.len() as f64
    }

    pub fn nonzero_count(&self) -> usize {
        self.reflectance.iter().filter(|&&r| r > 0.0).count()
    }

    /// Complex amplitude factor √R·e^{iφ} per pixel.
    pub fn amplitude_factors(&self) -> Vec<Complex64> {
        match &self.phase {
            Some(phase) => self
                .reflectance
                .iter()
                .zip(phase)
                .map(|(&r, &p)| Complex64::from_polar(r.sqrt(), p))
                .collect(),
            None => self.reflectance.iter().map(|&r| Complex64::new(r.sqrt(), 0.0)).collect(),
        }
    }

    /// Load a binary mask from an 8-bit P5 PGM; samples ≥ 128 reflect.
    pub fn from_pgm(path: &Path, n: usize) -> Result<Self> {
        let pgm = crate::sensor::read_pgm(path)?;
        if pgm.maxval > 255 {
            return Err(Error::ImageFormat {
                path: path.to_path_buf(),
                reason: format!("object masks must be 8-bit, maxval is {}", pgm.maxval),
            });
        }
        if pgm.width != n || pgm.height != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                actual: (pgm.width, pgm.height),
            });
        }
        let reflectance = pgm.samples.iter().map(|&v| if v >= 128 { 1.0 } else { 0.0 }).collect();
        Self::new(n, n, reflectance)
    }
}

/// Multiply the field by √reflectance·e^{i·phase}.
pub fn apply_object(field: &ComplexField, mask: &ObjectMask) -> Result<ComplexField> {
    if mask.width != field.n() || mask.height != field.n() {
        return Err(Error::DimensionMismatch {
            expected: (field.n(), field.n()),
            actual: (mask.width, mask.height),
        });
    }
    let factors = mask.amplitude_factors();
    Ok(field.map_amplitudes(|i, a| a * factors[i]))
}

/// Embedded test objects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinObject {
    Q,
    DoubleSlit,
    /// Single pixel offset `(dx, dy)` pixels from the grid centre.
    Point { dx: i64, dy: i64 },
    Uniform,
}

impl BuiltinObject {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "q" => Ok(Self::Q),
            "double-slit" | "double_slit" => Ok(Self::DoubleSlit),
            "point" => Ok(Self::Point { dx: 0, dy: 0 }),
            "uniform" => Ok(Self::Uniform),
            _ => Err(Error::UnknownObject(name.to_string())),
        }
    }

    /// Rasterize on an `n × n` grid; `scale` is the glyph box side as a fraction of the grid.
    pub fn render(&self, n: usize, scale: f64) -> Result<ObjectMask> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(invalid("object.scale", format!("must lie in (0, 1], got {scale}")));
        }
        let side = scale * n as f64;
        let centre = (n / 2) as f64;
        let inside: Box<dyn Fn(f64, f64) -> bool> = match *self {
            Self::Uniform => Box::new(|_, _| true),
            Self::Q => Box::new(q_glyph),
            Self::DoubleSlit => Box::new(|x: f64, y: f64| {
                y.abs() <= 0.4 && ((x - 0.15).abs() <= 0.04 || (x + 0.15).abs() <= 0.04)
            }),
            Self::Point { dx, dy } => {
                let (pr, pc) = (n as i64 / 2 + dy, n as i64 / 2 + dx);
                if pr < 0 || pc < 0 || pr >= n as i64 || pc >= n as i64 {
                    return Err(invalid("object.point", "point offset lies outside the grid"));
                }
                let mut reflectance = vec![0.0; n * n];
                reflectance[pr as usize * n + pc as usize] = 1.0;
                return ObjectMask::new(n, n, reflectance);
            }
        };
        let reflectance = (0..n * n)
            .map(|i| {
                let (r, c) = (i / n, i % n);
                let x = (c as f64 - centre) / side;
                let y = (r as f64 - centre) / side;
                if inside(x, y) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        ObjectMask::new(n, n, reflectance)
    }
}

/// Letter Q on the unit box [−½, ½]²: a ring with a tail towards the lower right.
fn q_glyph(x: f64, y: f64) -> bool {
    let r = x.hypot(y);
    let ring = (0.27..=0.42).contains(&r);
    // Tail: thick segment from (0.08, 0.12) to (0.40, 0.46).
    let (ax, ay, bx, by) = (0.08, 0.12, 0.40, 0.46);
    let (dx, dy) = (bx - ax, by - ay);
    let t = (((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    let dist = (x - ax - t * dx).hypot(y - ay - t * dy);
    ring || dist <= 0.065
}

/// Render a named builtin (`Q`, `double-slit`, `point`, `uniform`).
pub fn builtin_object(name: &str, n: usize, scale: f64) -> Result<ObjectMask> {
    BuiltinObject::parse(name)?.render(n, scale)
}
