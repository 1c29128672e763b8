//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, ReconstructArgs};
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::presets::{run_preset, Preset};

#[derive(Debug, Parser)]
#[command(name = "tpi", version, about = "Two-photon interference imaging simulator and reconstructor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paired camera frames and write two TPIF stacks.
    Simulate(ConfigArgs),
    /// Reconstruct TPI, GI or classical images from two stacks.
    Reconstruct(ReconstructCmd),
    /// Run an experiment preset and write its full artifact set.
    Preset {
        #[arg(value_enum)]
        name: PresetName,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score an image against a reference image.
    Metrics(MetricsCmd),
    /// Check two stacks for off-by-one frame pairing.
    DiagnoseSync(SyncCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Fig2,
    Fig3,
    Psf,
}

impl From<PresetName> for Preset {
    fn from(p: PresetName) -> Self {
        match p {
            PresetName::Fig2 => Preset::Fig2,
            PresetName::Fig3 => Preset::Fig3,
            PresetName::Psf => Preset::Psf,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 uses every core).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    /// Apply the file, then `--set` overrides, then the dedicated flags.
    pub fn resolve(&self, mut cfg: RunConfig) -> CliResult<RunConfig> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| crate::error::CliError::io(path, e))?;
            cfg.apply_text(&text)?;
        }
        cfg.apply_overrides(&self.set)?;
        if let Some(v) = self.frames {
            cfg.frames = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.threads {
            cfg.threads = v;
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct ReconstructCmd {
    #[arg(long)]
    pub stack1: PathBuf,
    #[arg(long)]
    pub stack2: PathBuf,
    /// tpi, gi, classical or all; may be repeated.
    #[arg(long, default_value = "all")]
    pub method: Vec<String>,
    /// Ground-truth image (CSV or PGM) to score against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Binary object mask (8-bit PGM) for the CNR regions.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
    /// Treat camera-2 frames as already unmirrored.
    #[arg(long)]
    pub no_align_flip: bool,
}

#[derive(Debug, Args)]
pub struct MetricsCmd {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Background exclusion radius around the signal region, in pixels.
    #[arg(long, default_value_t = 1.0)]
    pub erosion: f64,
}

#[derive(Debug, Args)]
pub struct SyncCmd {
    #[arg(long)]
    pub stack1: PathBuf,
    #[arg(long)]
    pub stack2: PathBuf,
    #[arg(long)]
    pub no_align_flip: bool,
}

/// Execute a parsed command and return the text to print.
pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve(RunConfig::default())?;
            let out = commands::simulate(&cfg)?;
            Ok(commands::simulate_summary(&out, &cfg))
        }
        Command::Reconstruct(cmd) => {
            let out = commands::reconstruct(&ReconstructArgs {
                stack1: cmd.stack1.clone(),
                stack2: cmd.stack2.clone(),
                methods: commands::parse_methods(&cmd.method)?,
                truth: cmd.truth.clone(),
                mask: cmd.mask.clone(),
                output_dir: cmd.output_dir.clone(),
                align_flip: !cmd.no_align_flip,
            })?;
            Ok(commands::reconstruct_summary(&out))
        }
        Command::Preset { name, config } => {
            let preset = Preset::from(*name);
            let cfg = config.resolve(preset.base_config())?;
            let out = run_preset(preset, &cfg)?;
            let mut text = out.summary;
            for f in &out.files {
                text.push_str(&format!("wrote {}\n", f.display()));
            }
            Ok(text)
        }
        Command::Metrics(cmd) => {
            let scores = commands::metrics(&cmd.image, &cmd.truth, cmd.mask.as_deref(), cmd.erosion)?;
            Ok(commands::metrics_summary(&scores))
        }
        Command::DiagnoseSync(cmd) => commands::diagnose(&cmd.stack1, &cmd.stack2, !cmd.no_align_flip),
    }
}
