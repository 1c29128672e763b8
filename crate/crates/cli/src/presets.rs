//! Experiment presets reproducing the letter-Q, turbulence and PSF studies at desk scale.

use std::fmt::Write as _;
use std::path::PathBuf;

use tpi_core::analytic::{analytic_fwhm_pixels, image_fwhm, predicted_classical_image, predicted_tpi_image};
use tpi_core::metrics::{convergence_study, ncc, reports_from_csv, reports_to_csv};
use tpi_core::pipeline::{reconstruct, with_threads};
use tpi_core::scene::generate_source_frame;
use tpi_core::sensor::{write_pgm16, DisplayTransform};
use tpi_core::turbulence::apply_turbulence;
use tpi_core::{CorrelatorState, Image, Method, MetricReport, Pipeline, TurbulenceModel};

use crate::commands::{create_dir, write_text};
use crate::config::{turbulence_model_name, RunConfig};
use crate::error::{CliError, CliResult};

/// Frame counts of the letter-Q convergence figure.
pub const FIG2_FRAMES: [u64; 3] = [10, 500, 1000];
pub const FIG2_CSV: &str = "fig2_convergence.csv";
pub const FIG3_CSV: &str = "fig3_invariance.csv";
pub const PSF_CSV: &str = "psf_report.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Psf,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Psf => "psf",
        }
    }

    /// Keys the preset sets on top of the defaults; files and flags override them.
    pub fn layer(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Preset::Fig2 => &[],
            Preset::Fig3 => &[("run.frames", "200"), ("run.seeds", "5")],
            Preset::Psf => &[
                ("run.grid", "64"),
                ("object.name", "point"),
                ("optics.lens_d_m", "0.0016"),
                ("run.frames", "5000"),
            ],
        }
    }

    pub fn base_config(self) -> RunConfig {
        let mut cfg = RunConfig::default();
        for (k, v) in self.layer() {
            cfg.set(k, v).expect("preset layers use valid keys");
        }
        cfg
    }
}

#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn run_preset(preset: Preset, cfg: &RunConfig) -> CliResult<PresetOutput> {
    with_threads(cfg.threads(), || match preset {
        Preset::Fig2 => fig2(cfg),
        Preset::Fig3 => fig3(cfg).map(|(out, _)| out),
        Preset::Psf => psf(cfg).map(|(out, _)| out),
    })?
}

fn save_pgm(files: &mut Vec<PathBuf>, cfg: &RunConfig, name: String, image: &Image) -> CliResult<()> {
    let path = cfg.output_dir.join(name);
    write_pgm16(&path, image, DisplayTransform::ClampAtZero)?;
    files.push(path);
    Ok(())
}

/// TPI, GI and classical reconstructions after 10, 500 and 1000 frames, plus a
/// convergence table over `run.seeds` seeds.
pub fn fig2(cfg: &RunConfig) -> CliResult<PresetOutput> {
    let pipeline = cfg.pipeline()?;
    create_dir(&cfg.output_dir)?;
    let mut files = Vec::new();
    for (frames, state) in pipeline.run_checkpoints(cfg.seed, &FIG2_FRAMES)? {
        for method in Method::ALL {
            save_pgm(&mut files, cfg, format!("fig2_{method}_{frames}.pgm"), &reconstruct(&state, method)?)?;
        }
    }
    let reports = convergence_study(&pipeline, &FIG2_FRAMES, &cfg.seed_list())?;
    let csv_path = cfg.output_dir.join(FIG2_CSV);
    write_text(&csv_path, &reports_to_csv(&reports))?;
    files.push(csv_path);
    Ok(PresetOutput {
        files,
        summary: fig2_summary(&reports),
    })
}

/// Seed-averaged NCC per method and frame count.
pub fn mean_ncc(reports: &[MetricReport], method: Method, frames: u64) -> f64 {
    let v: Vec<f64> = reports.iter().filter(|r| r.method == method && r.frames == frames).map(|r| r.ncc).collect();
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn fig2_summary(reports: &[MetricReport]) -> String {
    let mut s = String::from("method,frames,mean_ncc\n");
    for method in Method::ALL {
        for frames in FIG2_FRAMES {
            writeln!(s, "{method},{frames},{:.4}", mean_ncc(reports, method, frames)).unwrap();
        }
    }
    s
}

pub fn read_fig2_csv(text: &str) -> CliResult<Vec<MetricReport>> {
    Ok(reports_from_csv(text)?)
}

/// One turbulence model on one seed, compared against the turbulence-free run.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceRow {
    pub model: TurbulenceModel,
    pub seed: u64,
    pub frames: u64,
    pub ncc_tpi: f64,
    pub ncc_classical: f64,
    /// RMS displacement of the camera-1 per-frame centroid about its mean, in pixels.
    pub classical_frame_jitter_px: f64,
    pub tpi_centroid_shift_px: f64,
    pub classical_centroid_shift_px: f64,
    /// Largest per-frame relative change of total field power caused by the turbulence.
    pub max_power_change: f64,
}

pub const INVARIANCE_HEADER: &str = "model,seed,frames,ncc_tpi,ncc_classical,classical_frame_jitter_px,tpi_centroid_shift_px,classical_centroid_shift_px,max_power_change";

pub fn invariance_to_csv(rows: &[InvarianceRow]) -> String {
    let mut s = format!("{INVARIANCE_HEADER}\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            turbulence_model_name(r.model),
            r.seed,
            r.frames,
            r.ncc_tpi,
            r.ncc_classical,
            r.classical_frame_jitter_px,
            r.tpi_centroid_shift_px,
            r.classical_centroid_shift_px,
            r.max_power_change
        )
        .unwrap();
    }
    s
}

pub fn invariance_from_csv(text: &str) -> CliResult<Vec<InvarianceRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(INVARIANCE_HEADER) {
        return Err(CliError::Usage("invariance report: unexpected header".to_string()));
    }
    let bad = |line: &str| CliError::Usage(format!("invariance report: malformed row `{line}`"));
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad(line));
            }
            let mut probe = RunConfig::default();
            probe.set("turbulence.model", f[0]).map_err(|_| bad(line))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            let int = |s: &str| s.parse::<u64>().map_err(|_| bad(line));
            Ok(InvarianceRow {
                model: probe.turbulence_model,
                seed: int(f[1])?,
                frames: int(f[2])?,
                ncc_tpi: num(f[3])?,
                ncc_classical: num(f[4])?,
                classical_frame_jitter_px: num(f[5])?,
                tpi_centroid_shift_px: num(f[6])?,
                classical_centroid_shift_px: num(f[7])?,
                max_power_change: num(f[8])?,
            })
        })
        .collect()
}

/// Correlator state plus the RMS centroid jitter of the camera-1 frames.
pub fn run_with_jitter(pipeline: &Pipeline, seed: u64, frames: u64) -> CliResult<(CorrelatorState, f64)> {
    let mut state = pipeline.new_state()?;
    let mut centroids = Vec::with_capacity(frames as usize);
    let n = pipeline.n();
    pipeline.generate(seed, frames, |a, b| {
        let img = Image::new(n, n, a.counts().iter().map(|&c| c as f64).collect())?;
        if let Some(c) = img.centroid() {
            centroids.push(c);
        }
        state.accumulate(&a, &b, pipeline.align_flip())
    })?;
    let m = centroids.len() as f64;
    let (mx, my) = centroids.iter().fold((0.0, 0.0), |(x, y), c| (x + c.0 / m, y + c.1 / m));
    let ss: f64 = centroids.iter().map(|c| (c.0 - mx).powi(2) + (c.1 - my).powi(2)).sum();
    Ok((state, (ss / (m - 1.0).max(1.0)).sqrt()))
}

fn centroid_shift(a: &Image, b: &Image) -> f64 {
    match (a.centroid(), b.centroid()) {
        (Some(p), Some(q)) => (p.0 - q.0).hypot(p.1 - q.1),
        _ => f64::NAN,
    }
}

/// Largest relative power change the turbulence operator applies to the source frames.
pub fn max_power_change(cfg: &RunConfig, seed: u64) -> CliResult<f64> {
    let grid = cfg.grid_spec()?;
    let spec = cfg.turbulence();
    let mut worst: f64 = 0.0;
    for k in 0..cfg.frames {
        let field = generate_source_frame(&cfg.source(), grid.n, grid.pitch, grid.wavelength, seed, k)?;
        let disturbed = apply_turbulence(&field, &spec, cfg.grain_px, seed, k)?;
        let (p0, p1) = (field.total_power(), disturbed.total_power());
        worst = worst.max((p1 - p0).abs() / p0);
    }
    Ok(worst)
}

pub const FIG3_MODELS: [TurbulenceModel; 3] =
    [TurbulenceModel::None, TurbulenceModel::PerMode, TurbulenceModel::PhaseScreen];

/// TPI and classical images with no turbulence, per-mode phases and a phase screen.
pub fn fig3(cfg: &RunConfig) -> CliResult<(PresetOutput, Vec<InvarianceRow>)> {
    create_dir(&cfg.output_dir)?;
    let configs: Vec<RunConfig> = FIG3_MODELS
        .iter()
        .map(|&model| RunConfig {
            turbulence_model: model,
            ..cfg.clone()
        })
        .collect();
    let pipelines = configs.iter().map(RunConfig::pipeline).collect::<CliResult<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut files = Vec::new();
    for (i, seed) in cfg.seed_list().into_iter().enumerate() {
        let (base, _) = run_with_jitter(&pipelines[0], seed, cfg.frames)?;
        let (base_tpi, base_cl) = (base.tpi_image()?, base.classical_images()?.0);
        for (model_cfg, pipeline) in configs.iter().zip(&pipelines) {
            let (state, jitter) = run_with_jitter(pipeline, seed, cfg.frames)?;
            let (tpi, classical) = (state.tpi_image()?, state.classical_images()?.0);
            if i == 0 {
                let name = turbulence_model_name(model_cfg.turbulence_model);
                save_pgm(&mut files, cfg, format!("fig3_{name}_tpi.pgm"), &tpi)?;
                save_pgm(&mut files, cfg, format!("fig3_{name}_classical.pgm"), &classical)?;
            }
            rows.push(InvarianceRow {
                model: model_cfg.turbulence_model,
                seed,
                frames: cfg.frames,
                ncc_tpi: ncc(&tpi, &base_tpi)?,
                ncc_classical: ncc(&classical, &base_cl)?,
                classical_frame_jitter_px: jitter,
                tpi_centroid_shift_px: centroid_shift(&tpi, &base_tpi),
                classical_centroid_shift_px: centroid_shift(&classical, &base_cl),
                max_power_change: max_power_change(model_cfg, seed)?,
            });
        }
    }
    let csv_path = cfg.output_dir.join(FIG3_CSV);
    write_text(&csv_path, &invariance_to_csv(&rows))?;
    files.push(csv_path);
    let summary = fig3_summary(&rows);
    Ok((PresetOutput { files, summary }, rows))
}

pub fn fig3_summary(rows: &[InvarianceRow]) -> String {
    let mut s = String::from("model,min_ncc_tpi,mean_ncc_classical,mean_frame_jitter_px,mean_tpi_shift_px,max_power_change\n");
    for model in FIG3_MODELS {
        let sel: Vec<&InvarianceRow> = rows.iter().filter(|r| r.model == model).collect();
        let m = sel.len() as f64;
        writeln!(
            s,
            "{},{:.6},{:.6},{:.4},{:.4},{:.3e}",
            turbulence_model_name(model),
            sel.iter().map(|r| r.ncc_tpi).fold(f64::INFINITY, f64::min),
            sel.iter().map(|r| r.ncc_classical).sum::<f64>() / m,
            sel.iter().map(|r| r.classical_frame_jitter_px).sum::<f64>() / m,
            sel.iter().map(|r| r.tpi_centroid_shift_px).sum::<f64>() / m,
            sel.iter().map(|r| r.max_power_change).fold(0.0, f64::max),
        )
        .unwrap();
    }
    s
}

/// Point-object sharpening: measured and analytic FWHM of the TPI and classical images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsfReport {
    pub frames: u64,
    pub fwhm_tpi_px: f64,
    pub fwhm_classical_px: f64,
    pub analytic_fwhm_tpi_px: f64,
    pub analytic_fwhm_classical_px: f64,
    pub predicted_fwhm_tpi_px: f64,
    pub predicted_fwhm_classical_px: f64,
}

impl PsfReport {
    pub fn measured_ratio(&self) -> f64 {
        self.fwhm_tpi_px / self.fwhm_classical_px
    }

    pub fn analytic_ratio(&self) -> f64 {
        self.analytic_fwhm_tpi_px / self.analytic_fwhm_classical_px
    }

    fn fields(&self) -> [(&'static str, f64); 9] {
        [
            ("frames", self.frames as f64),
            ("fwhm_tpi_px", self.fwhm_tpi_px),
            ("fwhm_classical_px", self.fwhm_classical_px),
            ("analytic_fwhm_tpi_px", self.analytic_fwhm_tpi_px),
            ("analytic_fwhm_classical_px", self.analytic_fwhm_classical_px),
            ("predicted_fwhm_tpi_px", self.predicted_fwhm_tpi_px),
            ("predicted_fwhm_classical_px", self.predicted_fwhm_classical_px),
            ("measured_ratio", self.measured_ratio()),
            ("analytic_ratio", self.analytic_ratio()),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("quantity,value\n");
        for (k, v) in self.fields() {
            writeln!(s, "{k},{v}").unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> CliResult<Self> {
        let bad = |why: String| CliError::Usage(format!("psf report: {why}"));
        let mut lines = text.lines();
        if lines.next() != Some("quantity,value") {
            return Err(bad("unexpected header".to_string()));
        }
        let mut values = std::collections::HashMap::new();
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once(',').ok_or_else(|| bad(format!("malformed row `{line}`")))?;
            values.insert(k.to_string(), v.parse::<f64>().map_err(|_| bad(format!("malformed row `{line}`")))?);
        }
        let get = |k: &str| values.get(k).copied().ok_or_else(|| bad(format!("missing `{k}`")));
        Ok(Self {
            frames: get("frames")? as u64,
            fwhm_tpi_px: get("fwhm_tpi_px")?,
            fwhm_classical_px: get("fwhm_classical_px")?,
            analytic_fwhm_tpi_px: get("analytic_fwhm_tpi_px")?,
            analytic_fwhm_classical_px: get("analytic_fwhm_classical_px")?,
            predicted_fwhm_tpi_px: get("predicted_fwhm_tpi_px")?,
            predicted_fwhm_classical_px: get("predicted_fwhm_classical_px")?,
        })
    }
}

fn fwhm_of(image: &Image, what: &str) -> CliResult<f64> {
    image_fwhm(image).ok_or_else(|| CliError::Usage(format!("{what} has no resolvable half-maximum width")))
}

pub fn psf(cfg: &RunConfig) -> CliResult<(PresetOutput, PsfReport)> {
    let pipeline = cfg.pipeline()?;
    create_dir(&cfg.output_dir)?;
    let state = pipeline.run(cfg.seed, cfg.frames)?;
    let (tpi, classical) = (state.tpi_image()?, state.classical_images()?.0);
    let mut files = Vec::new();
    save_pgm(&mut files, cfg, "psf_tpi.pgm".to_string(), &tpi)?;
    save_pgm(&mut files, cfg, "psf_classical.pgm".to_string(), &classical)?;
    let spec = pipeline.psf_spec();
    let pitch = cfg.pitch_um * 1e-6;
    let mask = pipeline.simulator().mask();
    let report = PsfReport {
        frames: cfg.frames,
        fwhm_tpi_px: fwhm_of(&tpi, "TPI image")?,
        fwhm_classical_px: fwhm_of(&classical, "classical image")?,
        analytic_fwhm_tpi_px: analytic_fwhm_pixels(&spec, pitch, 4),
        analytic_fwhm_classical_px: analytic_fwhm_pixels(&spec, pitch, 2),
        predicted_fwhm_tpi_px: fwhm_of(&predicted_tpi_image(mask, &spec, pitch)?, "predicted TPI image")?,
        predicted_fwhm_classical_px: fwhm_of(&predicted_classical_image(mask, &spec, pitch)?, "predicted classical image")?,
    };
    let csv_path = cfg.output_dir.join(PSF_CSV);
    write_text(&csv_path, &report.to_csv())?;
    files.push(csv_path);
    let summary = report.to_csv();
    Ok((PresetOutput { files, summary }, report))
}
