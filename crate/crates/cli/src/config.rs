//! Flat `key = value` run configuration.
//!
//! Keys live in dotted namespaces (`run.`, `source.`, `object.`, `optics.`,
//! `turbulence.`, `sensor.`) plus the top-level `output_dir`. Lines may carry
//! `#` comments. Later assignments override earlier ones, so command-line
//! overrides are simply applied after the file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tpi_core::optics::OpticalLayout;
use tpi_core::scene::{BuiltinObject, FrameSimulator, ObjectMask, SimulationGrid, SourceMode, SourceSpec};
use tpi_core::sensor::{NoiseModel, MAX_COUNT, SATURATION_FRACTION};
use tpi_core::{Pipeline, Refresh, TurbulenceModel, TurbulenceSpec};

use crate::error::{CliError, CliResult};

/// Multiple of the mean brightest-pixel count that must stay below the saturation limit.
pub const SPECKLE_HEADROOM: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectSource {
    Builtin(String),
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub frames: u64,
    pub seed: u64,
    pub grid: usize,
    /// Object-plane sampling pitch in micrometres.
    pub pitch_um: f64,
    /// Number of consecutive seeds, starting at `seed`, used by multi-seed presets.
    pub seeds: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub align_flip: bool,
    pub output_dir: PathBuf,

    pub grain_px: usize,
    pub mean_photons: f64,
    pub source_mode: SourceMode,

    pub object: ObjectSource,
    pub object_scale: f64,
    /// Per-pixel random surface phase; unset means on for the Q glyph only.
    pub object_diffuse: Option<bool>,
    pub point_x: i64,
    pub point_y: i64,

    pub wavelength_nm: f64,
    pub z1_m: f64,
    pub so_m: f64,
    pub si_m: f64,
    pub f_m: f64,
    pub z2_m: f64,
    /// Camera arms; unset means derived so that each camera sits on the image plane.
    pub z3_m: Option<f64>,
    pub z4_m: Option<f64>,
    pub lens_d_m: f64,

    pub turbulence_model: TurbulenceModel,
    pub sigma_phi: f64,
    pub cn2: f64,
    pub path_m: f64,
    pub screen_m: f64,
    pub refresh: Refresh,

    pub shot_noise: bool,
    pub read_noise: f64,
    pub qe: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let layout = OpticalLayout::experiment_default();
        let turbulence = TurbulenceSpec::none();
        let noise = NoiseModel::default();
        let source = SourceSpec::default();
        Self {
            frames: 1000,
            seed: 1,
            grid: 128,
            pitch_um: 20.0,
            seeds: 1,
            threads: 0,
            align_flip: true,
            output_dir: PathBuf::from("out"),
            grain_px: source.grain,
            mean_photons: source.mean_photons,
            source_mode: source.mode,
            object: ObjectSource::Builtin("Q".to_string()),
            object_scale: 0.6,
            object_diffuse: None,
            point_x: 0,
            point_y: 0,
            wavelength_nm: 532.0,
            z1_m: layout.z1,
            so_m: layout.so,
            si_m: layout.si,
            f_m: layout.f,
            z2_m: layout.z2,
            z3_m: None,
            z4_m: None,
            lens_d_m: layout.lens_diameter,
            turbulence_model: turbulence.model,
            sigma_phi: turbulence.sigma_phi,
            cn2: turbulence.cn2,
            path_m: turbulence.path_length,
            screen_m: turbulence.screen_position,
            refresh: turbulence.refresh,
            shot_noise: noise.shot_noise,
            read_noise: noise.read_noise_sigma,
            qe: noise.quantum_efficiency,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, expected: &'static str) -> CliResult<T> {
    value.parse().map_err(|_| CliError::Type {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    let v: f64 = parse_num(key, value, "a number")?;
    if !v.is_finite() {
        return Err(CliError::Type {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a finite number",
        });
    }
    Ok(v)
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::Type {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a boolean",
        }),
    }
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)], expected: &'static str) -> CliResult<T> {
    let lower = value.to_ascii_lowercase();
    options
        .iter()
        .find(|(name, _)| *name == lower)
        .map(|&(_, v)| v)
        .ok_or_else(|| CliError::Type {
            key: key.to_string(),
            value: value.to_string(),
            expected,
        })
}

fn invalid(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Validation {
        key: key.to_string(),
        reason: reason.into(),
    }
}

const SOURCE_MODES: &[(&str, SourceMode)] = &[
    ("synthetic", SourceMode::ObjectPlaneSynthetic),
    ("full-path", SourceMode::FullPath),
    ("full_path", SourceMode::FullPath),
];
const TURBULENCE_MODELS: &[(&str, TurbulenceModel)] = &[
    ("none", TurbulenceModel::None),
    ("per-mode", TurbulenceModel::PerMode),
    ("per_mode", TurbulenceModel::PerMode),
    ("phase-screen", TurbulenceModel::PhaseScreen),
    ("phase_screen", TurbulenceModel::PhaseScreen),
];
const REFRESH_MODES: &[(&str, Refresh)] = &[
    ("per-frame", Refresh::PerFrame),
    ("per_frame", Refresh::PerFrame),
    ("frozen", Refresh::Frozen),
];

pub fn source_mode_name(mode: SourceMode) -> &'static str {
    match mode {
        SourceMode::ObjectPlaneSynthetic => "synthetic",
        SourceMode::FullPath => "full-path",
    }
}

pub fn turbulence_model_name(model: TurbulenceModel) -> &'static str {
    match model {
        TurbulenceModel::None => "none",
        TurbulenceModel::PerMode => "per-mode",
        TurbulenceModel::PhaseScreen => "phase-screen",
    }
}

fn refresh_name(refresh: Refresh) -> &'static str {
    match refresh {
        Refresh::PerFrame => "per-frame",
        Refresh::Frozen => "frozen",
    }
}

impl RunConfig {
    /// Parse configuration text on top of the defaults.
    pub fn from_text(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Apply `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> CliResult<()> {
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("override `{item}` is not of the form key=value")))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "run.frames" => self.frames = parse_num(key, value, "a non-negative integer")?,
            "run.seed" => self.seed = parse_num(key, value, "a 64-bit unsigned integer")?,
            "run.grid" => self.grid = parse_num(key, value, "a positive integer")?,
            "run.pitch_um" => self.pitch_um = parse_f64(key, value)?,
            "run.seeds" => self.seeds = parse_num(key, value, "a positive integer")?,
            "run.threads" => self.threads = parse_num(key, value, "a non-negative integer")?,
            "run.align_flip" => self.align_flip = parse_bool(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "source.grain_px" => self.grain_px = parse_num(key, value, "a positive integer")?,
            "source.mean_photons" => self.mean_photons = parse_f64(key, value)?,
            "source.mode" => self.source_mode = choice(key, value, SOURCE_MODES, "one of synthetic, full-path")?,
            "object.name" => self.object = ObjectSource::Builtin(value.to_string()),
            "object.path" => self.object = ObjectSource::Path(PathBuf::from(value)),
            "object.scale" => self.object_scale = parse_f64(key, value)?,
            "object.diffuse" => self.object_diffuse = Some(parse_bool(key, value)?),
            "object.point_x" => self.point_x = parse_num(key, value, "an integer")?,
            "object.point_y" => self.point_y = parse_num(key, value, "an integer")?,
            "optics.wavelength_nm" => self.wavelength_nm = parse_f64(key, value)?,
            "optics.z1_m" => self.z1_m = parse_f64(key, value)?,
            "optics.so_m" => self.so_m = parse_f64(key, value)?,
            "optics.si_m" => self.si_m = parse_f64(key, value)?,
            "optics.f_m" => self.f_m = parse_f64(key, value)?,
            "optics.z2_m" => self.z2_m = parse_f64(key, value)?,
            "optics.z3_m" => self.z3_m = Some(parse_f64(key, value)?),
            "optics.z4_m" => self.z4_m = Some(parse_f64(key, value)?),
            "optics.lens_d_m" => self.lens_d_m = parse_f64(key, value)?,
            "turbulence.model" => {
                self.turbulence_model = choice(key, value, TURBULENCE_MODELS, "one of none, per-mode, phase-screen")?
            }
            "turbulence.sigma_phi" => self.sigma_phi = parse_f64(key, value)?,
            "turbulence.cn2" => self.cn2 = parse_f64(key, value)?,
            "turbulence.path_m" => self.path_m = parse_f64(key, value)?,
            "turbulence.screen_m" => self.screen_m = parse_f64(key, value)?,
            "turbulence.refresh" => self.refresh = choice(key, value, REFRESH_MODES, "one of per-frame, frozen")?,
            "sensor.shot_noise" => self.shot_noise = parse_bool(key, value)?,
            "sensor.read_noise" => self.read_noise = parse_f64(key, value)?,
            "sensor.qe" => self.qe = parse_f64(key, value)?,
            _ => return Err(CliError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Canonical text form; parsing it reproduces this configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn std::fmt::Display| {
            writeln!(out, "{k} = {v}").expect("writing to a String cannot fail");
        };
        line("run.frames", &self.frames);
        line("run.seed", &self.seed);
        line("run.grid", &self.grid);
        line("run.pitch_um", &self.pitch_um);
        line("run.seeds", &self.seeds);
        line("run.threads", &self.threads);
        line("run.align_flip", &self.align_flip);
        line("output_dir", &self.output_dir.display());
        line("source.grain_px", &self.grain_px);
        line("source.mean_photons", &self.mean_photons);
        line("source.mode", &source_mode_name(self.source_mode));
        match &self.object {
            ObjectSource::Builtin(name) => line("object.name", name),
            ObjectSource::Path(path) => line("object.path", &path.display()),
        }
        line("object.scale", &self.object_scale);
        if let Some(d) = self.object_diffuse {
            line("object.diffuse", &d);
        }
        line("object.point_x", &self.point_x);
        line("object.point_y", &self.point_y);
        line("optics.wavelength_nm", &self.wavelength_nm);
        line("optics.z1_m", &self.z1_m);
        line("optics.so_m", &self.so_m);
        line("optics.si_m", &self.si_m);
        line("optics.f_m", &self.f_m);
        line("optics.z2_m", &self.z2_m);
        if let Some(z) = self.z3_m {
            line("optics.z3_m", &z);
        }
        if let Some(z) = self.z4_m {
            line("optics.z4_m", &z);
        }
        line("optics.lens_d_m", &self.lens_d_m);
        line("turbulence.model", &turbulence_model_name(self.turbulence_model));
        line("turbulence.sigma_phi", &self.sigma_phi);
        line("turbulence.cn2", &self.cn2);
        line("turbulence.path_m", &self.path_m);
        line("turbulence.screen_m", &self.screen_m);
        line("turbulence.refresh", &refresh_name(self.refresh));
        line("sensor.shot_noise", &self.shot_noise);
        line("sensor.read_noise", &self.read_noise);
        line("sensor.qe", &self.qe);
        out
    }

    /// Canonical text without the keys that cannot change results (`output_dir`, `run.threads`).
    pub fn experiment_text(&self) -> String {
        self.to_text()
            .lines()
            .filter(|l| !l.starts_with("output_dir ") && !l.starts_with("run.threads "))
            .fold(String::new(), |mut s, l| {
                s.push_str(l);
                s.push('\n');
                s
            })
    }

    pub fn threads(&self) -> Option<usize> {
        (self.threads > 0).then_some(self.threads)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds).map(|i| self.seed.wrapping_add(i)).collect()
    }

    pub fn layout(&self) -> OpticalLayout {
        let arm = self.si_m - (self.z2_m - self.so_m);
        OpticalLayout {
            z1: self.z1_m,
            z2: self.z2_m,
            z3: self.z3_m.unwrap_or(arm),
            z4: self.z4_m.unwrap_or(arm),
            so: self.so_m,
            si: self.si_m,
            f: self.f_m,
            lens_diameter: self.lens_d_m,
        }
    }

    pub fn grid_spec(&self) -> CliResult<SimulationGrid> {
        SimulationGrid::new(self.grid, self.pitch_um * 1e-6, self.wavelength_nm * 1e-9).map_err(core_validation)
    }

    pub fn source(&self) -> SourceSpec {
        SourceSpec {
            grain: self.grain_px,
            mean_photons: self.mean_photons,
            mode: self.source_mode,
        }
    }

    pub fn turbulence(&self) -> TurbulenceSpec {
        TurbulenceSpec {
            model: self.turbulence_model,
            sigma_phi: self.sigma_phi,
            cn2: self.cn2,
            path_length: self.path_m,
            screen_position: self.screen_m,
            refresh: self.refresh,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            shot_noise: self.shot_noise,
            read_noise_sigma: self.read_noise,
            quantum_efficiency: self.qe,
        }
    }

    pub fn mask(&self) -> CliResult<ObjectMask> {
        let (mask, glyph_q) = match &self.object {
            ObjectSource::Path(path) => (ObjectMask::from_pgm(path, self.grid)?, false),
            ObjectSource::Builtin(name) => {
                let object = match BuiltinObject::parse(name).map_err(core_validation)? {
                    BuiltinObject::Point { .. } => BuiltinObject::Point {
                        dx: self.point_x,
                        dy: self.point_y,
                    },
                    other => other,
                };
                let mask = object.render(self.grid, self.object_scale).map_err(core_validation)?;
                (mask, object == BuiltinObject::Q)
            }
        };
        Ok(mask.with_diffuse(self.object_diffuse.unwrap_or(glyph_q)))
    }

    /// Check every key-level constraint that the core types do not already cover.
    pub fn validate(&self) -> CliResult<()> {
        if self.frames == 0 {
            return Err(invalid("run.frames", "must be at least 1"));
        }
        if self.seeds == 0 {
            return Err(invalid("run.seeds", "must be at least 1"));
        }
        for (key, v) in [
            ("run.pitch_um", self.pitch_um),
            ("optics.wavelength_nm", self.wavelength_nm),
            ("source.mean_photons", self.mean_photons),
        ] {
            if v <= 0.0 {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        let peak = self.qe * self.mean_photons * SPECKLE_HEADROOM;
        let limit = SATURATION_FRACTION * MAX_COUNT as f64;
        if peak > limit {
            return Err(invalid(
                "source.mean_photons",
                format!(
                    "saturation headroom exceeded: {SPECKLE_HEADROOM} x qe x mean_photons = {peak} > {limit} counts"
                ),
            ));
        }
        self.noise().validate().map_err(core_validation)?;
        self.source().validate().map_err(core_validation)?;
        self.layout().validate().map_err(core_validation)?;
        self.turbulence().validate(self.z2_m).map_err(core_validation)?;
        Ok(())
    }

    pub fn simulator(&self) -> CliResult<FrameSimulator> {
        self.validate()?;
        FrameSimulator::new(self.grid_spec()?, self.source(), self.mask()?, self.layout(), self.turbulence())
            .map_err(core_validation)
    }

    /// Validate the whole configuration and build the simulation pipeline.
    pub fn pipeline(&self) -> CliResult<Pipeline> {
        Ok(Pipeline::new(self.simulator()?, self.noise())
            .map_err(core_validation)?
            .with_align_flip(self.align_flip))
    }
}

/// Configuration key corresponding to a core parameter name.
fn config_key(name: &str) -> &str {
    match name {
        "source.grain" => "source.grain_px",
        "turbulence.path_length" => "turbulence.path_m",
        "turbulence.screen_position" => "turbulence.screen_m",
        "object.point" => "object.point_x",
        other => other,
    }
}

/// Re-express core validation failures as errors naming a configuration key.
fn core_validation(e: tpi_core::Error) -> CliError {
    use tpi_core::Error as E;
    let (key, reason) = match &e {
        E::InvalidParameter { name, reason } => (config_key(name), reason.clone()),
        E::Layout(msg) => ("optics", msg.clone()),
        E::InvalidDimension(_) => ("run.grid", e.to_string()),
        E::Aliasing { .. } => ("optics.z1_m", e.to_string()),
        E::ApertureExceedsGrid { .. } => ("optics.lens_d_m", e.to_string()),
        E::UnknownObject(_) => ("object.name", e.to_string()),
        E::Saturation { .. } => ("source.mean_photons", e.to_string()),
        _ => return CliError::Core(e),
    };
    invalid(key, reason)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        assert_eq!(RunConfig::from_text("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::from_text("# only a comment\n\n").unwrap(), RunConfig::default());
        let layout = RunConfig::default().layout();
        assert!((layout.z3 - 0.2286).abs() < 1e-12);
        assert!((layout.z4 - 0.2286).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(&["turbulence.model=per-mode", "optics.z3_m=0.2286", "object.diffuse=false", "run.pitch_um=17.5"])
            .unwrap();
        assert_eq!(RunConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_overrides() {
        let mut cfg = RunConfig::from_text("run.frames = 10  # short run\nrun.seed=7\n").unwrap();
        assert_eq!((cfg.frames, cfg.seed), (10, 7));
        cfg.apply_overrides(&["run.frames=20"]).unwrap();
        assert_eq!(cfg.frames, 20);
    }

    #[test]
    fn errors_name_the_key() {
        let unknown = RunConfig::from_text("optics.focal = 1").unwrap_err();
        assert!(matches!(unknown, CliError::UnknownKey(ref k) if k == "optics.focal"));
        let typed = RunConfig::from_text("run.frames = many").unwrap_err();
        assert!(matches!(typed, CliError::Type { ref key, .. } if key == "run.frames"));
        let syntax = RunConfig::from_text("run.frames 10").unwrap_err();
        assert!(matches!(syntax, CliError::Syntax { line: 1, .. }));
        let grain = RunConfig::from_text("source.grain_px = 0").unwrap().validate().unwrap_err();
        assert!(matches!(grain, CliError::Validation { ref key, .. } if key == "source.grain_px"));
        let sat = RunConfig::from_text("source.mean_photons = 5000").unwrap().validate().unwrap_err();
        assert!(matches!(sat, CliError::Validation { ref key, .. } if key == "source.mean_photons"));
    }

    #[test]
    fn imaging_condition_is_checked() {
        let ok = RunConfig::from_text("optics.f_m = 0.25\noptics.so_m = 0.60\noptics.si_m = 0.43").unwrap();
        ok.validate().unwrap();
        let bad = RunConfig::from_text("optics.f_m = 0.25\noptics.so_m = 0.60\noptics.si_m = 0.30").unwrap();
        let err = bad.validate().unwrap_err();
        assert!(matches!(err, CliError::Validation { ref key, .. } if key == "optics"));
        assert!(err.to_string().contains("imaging condition"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn diffuse_defaults_follow_the_object() {
        assert!(RunConfig::default().mask().unwrap().is_diffuse());
        let point = RunConfig::from_text("object.name = point\nobject.point_x = 3").unwrap().mask().unwrap();
        assert!(!point.is_diffuse());
        assert_eq!(point.reflectance()[64 * 128 + 67], 1.0);
    }
}
