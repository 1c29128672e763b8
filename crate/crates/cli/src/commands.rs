//! Subcommand implementations. Each returns the text the binary prints.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tpi_core::correlator::diagnose_sync;
use tpi_core::metrics::{cnr, ncc, rmse, Regions};
use tpi_core::pipeline::{reconstruct as reconstruct_image, with_threads};
use tpi_core::sensor::{read_pgm, read_stack, write_pgm16, DisplayTransform, StackReader, StackWriter, VERSION};
use tpi_core::{CorrelatorState, Image, Method, ObjectMask};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const STACK1_FILE: &str = "ccd1.tpif";
pub const STACK2_FILE: &str = "ccd2.tpif";
pub const SIDECAR_FILE: &str = "provenance.txt";
pub const TRUTH_TPI_FILE: &str = "truth_tpi.csv";
pub const TRUTH_CLASSICAL_FILE: &str = "truth_classical.csv";

pub(crate) fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").expect("writing to a String cannot fail");
        s
    })
}

/// Plain-text provenance record: versions, seed, the hash of the settings that
/// determine the output, and the full resolved configuration.
pub fn provenance(command: &str, cfg: &RunConfig) -> String {
    let mut out = String::new();
    writeln!(out, "command = {command}").unwrap();
    writeln!(out, "tpi-cli = {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "tpif_version = {VERSION}").unwrap();
    writeln!(out, "seed = {}", cfg.seed).unwrap();
    writeln!(out, "frames = {}", cfg.frames).unwrap();
    writeln!(out, "config_sha256 = {}", sha256_hex(cfg.experiment_text().as_bytes())).unwrap();
    writeln!(out, "\n# resolved configuration").unwrap();
    out.push_str(&cfg.to_text());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutput {
    pub stack1: PathBuf,
    pub stack2: PathBuf,
    pub sidecar: PathBuf,
    pub truth_tpi: PathBuf,
    pub truth_classical: PathBuf,
}

/// Simulate `cfg.frames` frame pairs and stream them to two TPIF stacks.
///
/// Camera 2 frames are stored as recorded, that is mirrored by the beam splitter.
pub fn simulate(cfg: &RunConfig) -> CliResult<SimulateOutput> {
    let pipeline = cfg.pipeline()?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let out = SimulateOutput {
        stack1: dir.join(STACK1_FILE),
        stack2: dir.join(STACK2_FILE),
        sidecar: dir.join(SIDECAR_FILE),
        truth_tpi: dir.join(TRUTH_TPI_FILE),
        truth_classical: dir.join(TRUTH_CLASSICAL_FILE),
    };
    let n = pipeline.n();
    let mut w1 = StackWriter::create(&out.stack1, n, n, cfg.seed)?;
    let mut w2 = StackWriter::create(&out.stack2, n, n, cfg.seed)?;
    with_threads(cfg.threads(), || {
        pipeline.generate(cfg.seed, cfg.frames, |a, b| {
            w1.push(&a)?;
            w2.push(&b)
        })
    })??;
    w1.finish()?;
    w2.finish()?;
    let truths = pipeline.truths()?;
    truths.tpi.write_csv(&out.truth_tpi)?;
    truths.classical.write_csv(&out.truth_classical)?;
    write_text(&out.sidecar, &provenance("simulate", cfg))?;
    Ok(out)
}

pub fn simulate_summary(out: &SimulateOutput, cfg: &RunConfig) -> String {
    format!(
        "wrote {} and {} ({} frames, {}x{}, seed {})\nwrote {}\n",
        out.stack1.display(),
        out.stack2.display(),
        cfg.frames,
        cfg.grid,
        cfg.grid,
        cfg.seed,
        out.sidecar.display()
    )
}

/// Read a CSV (`.csv`) or PGM image as floating-point samples.
pub fn read_image(path: &Path) -> CliResult<Image> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        return Ok(Image::read_csv(path)?);
    }
    let pgm = read_pgm(path)?;
    Ok(Image::new(pgm.width, pgm.height, pgm.samples.iter().map(|&s| s as f64).collect())?)
}

/// Parse a method list: `tpi`, `gi`, `classical` or `all`.
pub fn parse_methods(names: &[String]) -> CliResult<Vec<Method>> {
    let mut out = Vec::new();
    for name in names {
        if name.eq_ignore_ascii_case("all") {
            out.extend(Method::ALL);
        } else {
            out.push(Method::parse(name).map_err(|_| {
                CliError::Usage(format!("unknown method `{name}` (expected tpi, gi, classical or all)"))
            })?);
        }
    }
    let mut seen = Vec::new();
    out.retain(|m| {
        let fresh = !seen.contains(m);
        seen.push(*m);
        fresh
    });
    if out.is_empty() {
        out.extend(Method::ALL);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ReconstructArgs {
    pub stack1: PathBuf,
    pub stack2: PathBuf,
    pub methods: Vec<Method>,
    pub truth: Option<PathBuf>,
    /// Object mask (8-bit PGM) defining the CNR signal and background regions.
    pub mask: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub align_flip: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub ncc: f64,
    pub rmse: f64,
    pub cnr: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub method: Method,
    pub image: Image,
    pub pgm: PathBuf,
    pub csv: PathBuf,
    pub scores: Option<Scores>,
}

#[derive(Debug, Clone)]
pub struct ReconstructOutput {
    pub frames: u64,
    pub images: Vec<Reconstruction>,
}

/// Stream two stacks through a correlator.
pub fn correlate_stacks(stack1: &Path, stack2: &Path, align_flip: bool) -> CliResult<CorrelatorState> {
    let r1 = StackReader::open(stack1)?;
    let r2 = StackReader::open(stack2)?;
    let (h1, h2) = (*r1.header(), *r2.header());
    if (h1.width, h1.height, h1.frame_count) != (h2.width, h2.height, h2.frame_count) {
        return Err(CliError::Usage(format!(
            "stacks disagree: {}x{} with {} frames versus {}x{} with {} frames",
            h1.width, h1.height, h1.frame_count, h2.width, h2.height, h2.frame_count
        )));
    }
    let mut state = CorrelatorState::new(h1.width as usize, h1.height as usize);
    for (a, b) in r1.zip(r2) {
        state.accumulate(&a?, &b?, align_flip)?;
    }
    Ok(state)
}

pub fn score_image(image: &Image, truth: &Image, regions: Option<&Regions>) -> CliResult<Scores> {
    Ok(Scores {
        ncc: ncc(image, truth)?,
        rmse: rmse(image, truth)?,
        cnr: regions.map(|r| cnr(image, r)).transpose()?,
    })
}

pub fn reconstruct(args: &ReconstructArgs) -> CliResult<ReconstructOutput> {
    let state = correlate_stacks(&args.stack1, &args.stack2, args.align_flip)?;
    let truth = args.truth.as_deref().map(read_image).transpose()?;
    let regions = match &args.mask {
        Some(path) => Some(Regions::from_mask(&ObjectMask::from_pgm(path, state.width())?, 1.0)),
        None => None,
    };
    create_dir(&args.output_dir)?;
    let mut images = Vec::new();
    for &method in &args.methods {
        let image = reconstruct_image(&state, method)?;
        let pgm = args.output_dir.join(format!("{method}.pgm"));
        let csv = args.output_dir.join(format!("{method}.csv"));
        write_pgm16(&pgm, &image, DisplayTransform::ClampAtZero)?;
        image.write_csv(&csv)?;
        let scores = truth.as_ref().map(|t| score_image(&image, t, regions.as_ref())).transpose()?;
        images.push(Reconstruction {
            method,
            image,
            pgm,
            csv,
            scores,
        });
    }
    Ok(ReconstructOutput {
        frames: state.n_frames(),
        images,
    })
}

fn fmt_cnr(cnr: Option<f64>) -> String {
    cnr.map_or_else(|| "nan".to_string(), |v| v.to_string())
}

pub fn reconstruct_summary(out: &ReconstructOutput) -> String {
    let mut s = format!("frames = {}\n", out.frames);
    let scored = out.images.iter().any(|r| r.scores.is_some());
    if scored {
        s.push_str("method,ncc,rmse,cnr\n");
    }
    for r in &out.images {
        match &r.scores {
            Some(sc) => writeln!(s, "{},{},{},{}", r.method, sc.ncc, sc.rmse, fmt_cnr(sc.cnr)).unwrap(),
            None => writeln!(s, "{}: wrote {} and {}", r.method, r.pgm.display(), r.csv.display()).unwrap(),
        }
    }
    s
}

/// Compare an image with a reference: NCC, unit-peak RMSE and, given a mask, CNR.
pub fn metrics(image: &Path, truth: &Path, mask: Option<&Path>, erosion: f64) -> CliResult<Scores> {
    let image = read_image(image)?;
    let truth = read_image(truth)?;
    let regions = match mask {
        Some(path) => Some(Regions::from_mask(&ObjectMask::from_pgm(path, image.width())?, erosion)),
        None => None,
    };
    score_image(&image, &truth, regions.as_ref())
}

pub fn metrics_summary(scores: &Scores) -> String {
    format!("ncc,rmse,cnr\n{},{},{}\n", scores.ncc, scores.rmse, fmt_cnr(scores.cnr))
}

/// TPI images at pairing lags −1, 0, +1; a best lag other than 0 signals misaligned stacks.
pub fn diagnose(stack1: &Path, stack2: &Path, align_flip: bool) -> CliResult<String> {
    let a = read_stack(stack1)?;
    let b = read_stack(stack2)?;
    let report = diagnose_sync(a.frames(), b.frames(), align_flip)?;
    let mut s = String::from("lag,pairs,mean_covariance,ncc_vs_lag0\n");
    for l in &report.lags {
        let n = l.ncc_vs_lag0.map_or_else(|| "nan".to_string(), |v| v.to_string());
        writeln!(s, "{},{},{},{}", l.lag, l.pairs, l.mean_covariance, n).unwrap();
    }
    if report.in_sync() {
        s.push_str("in sync: best lag 0\n");
    } else {
        writeln!(s, "OUT OF SYNC: best lag {}", report.best_lag).unwrap();
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_answer() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn provenance_hash_ignores_execution_settings() {
        let mut a = RunConfig::default();
        let mut b = RunConfig::default();
        a.apply_overrides(&["run.threads=1", "output_dir=x"]).unwrap();
        b.apply_overrides(&["run.threads=8", "output_dir=y"]).unwrap();
        let hash = |c: &RunConfig| provenance("simulate", c).lines().find(|l| l.starts_with("config_sha256")).unwrap().to_string();
        assert_eq!(hash(&a), hash(&b));
        b.apply_overrides(&["run.seed=2"]).unwrap();
        assert_ne!(hash(&a), hash(&b));
    }
}
