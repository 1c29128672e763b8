//! Ensemble orchestration: simulate, detect and correlate many frames in parallel.
//!
//! Frames are processed in fixed-size blocks; each block fills its own
//! correlator state and the states are merged in block order. Because the
//! accumulators are exact, results do not depend on the worker count.

use rayon::prelude::*;

use crate::analytic::{first_j1_zero, predicted_classical_image, predicted_tpi_image, PsfSpec};
use crate::correlator::{BucketMode, CorrelatorState, Roi};
use crate::error::Result;
use crate::image::Image;
use crate::metrics::{Method, Regions};
use crate::scene::FrameSimulator;
use crate::sensor::{detect, Camera, Frame, FrameStack, NoiseModel};

/// Frames per parallel work unit.
pub const BLOCK_FRAMES: u64 = 16;

#[derive(Debug, Clone)]
pub struct Pipeline {
    simulator: FrameSimulator,
    noise: NoiseModel,
    align_flip: bool,
    bucket: BucketMode,
    roi: Option<Roi>,
}

/// Analytic ground-truth images for scoring reconstructions.
#[derive(Debug, Clone, PartialEq)]
pub struct Truths {
    pub tpi: Image,
    pub classical: Image,
}

impl Truths {
    /// TPI is scored against the TPI prediction, GI and classical against the classical one.
    pub fn for_method(&self, method: Method) -> &Image {
        match method {
            Method::Tpi => &self.tpi,
            Method::Gi | Method::Classical => &self.classical,
        }
    }
}

impl Pipeline {
    pub fn new(simulator: FrameSimulator, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        Ok(Self {
            simulator,
            noise,
            align_flip: true,
            bucket: BucketMode::WholeFrame,
            roi: None,
        })
    }

    pub fn with_align_flip(mut self, align_flip: bool) -> Self {
        self.align_flip = align_flip;
        self
    }

    pub fn with_bucket(mut self, bucket: BucketMode) -> Self {
        self.bucket = bucket;
        self
    }

    pub fn with_roi(mut self, roi: Option<Roi>) -> Self {
        self.roi = roi;
        self
    }

    pub fn simulator(&self) -> &FrameSimulator {
        &self.simulator
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn align_flip(&self) -> bool {
        self.align_flip
    }

    pub fn n(&self) -> usize {
        self.simulator.grid().n
    }

    pub fn psf_spec(&self) -> PsfSpec {
        let layout = self.simulator.layout();
        PsfSpec {
            wavelength: self.simulator.grid().wavelength,
            lens_diameter: layout.lens_diameter,
            so: layout.so,
            magnification: layout.magnification(),
        }
    }

    /// Airy radius (first somb zero) in detector pixels.
    pub fn psf_radius_pixels(&self) -> f64 {
        first_j1_zero() / (self.psf_spec().scale() * self.simulator.grid().pitch)
    }

    pub fn truths(&self) -> Result<Truths> {
        let (mask, psf, pitch) = (self.simulator.mask(), self.psf_spec(), self.simulator.grid().pitch);
        Ok(Truths {
            tpi: predicted_tpi_image(mask, &psf, pitch)?,
            classical: predicted_classical_image(mask, &psf, pitch)?,
        })
    }

    pub fn regions(&self) -> Regions {
        Regions::from_mask(self.simulator.mask(), self.psf_radius_pixels().max(1.0))
    }

    /// A fresh correlator state with this pipeline's bucket and ROI settings.
    pub fn new_state(&self) -> Result<CorrelatorState> {
        let n = self.n();
        let mut state = CorrelatorState::new(n, n).with_bucket(self.bucket)?;
        if let Some(roi) = self.roi {
            state = state.with_roi(roi)?;
        }
        Ok(state)
    }

    /// Detected `(camera 1, camera 2)` frames for one index; camera 2 is still mirrored.
    pub fn frame_pair(&self, seed: u64, frame_index: u64) -> Result<(Frame, Frame)> {
        let (e1, e2) = self.simulator.simulate(seed, frame_index)?;
        Ok((
            detect(&e1, &self.noise, Camera::One, seed, frame_index)?,
            detect(&e2, &self.noise, Camera::Two, seed, frame_index)?,
        ))
    }

    fn accumulate_range(&self, seed: u64, start: u64, end: u64) -> Result<CorrelatorState> {
        let mut state = self.new_state()?;
        for k in start..end {
            let (a, b) = self.frame_pair(seed, k)?;
            state.accumulate(&a, &b, self.align_flip)?;
        }
        Ok(state)
    }

    /// Correlator state after frames `0..frames`.
    pub fn run(&self, seed: u64, frames: u64) -> Result<CorrelatorState> {
        Ok(self.run_checkpoints(seed, &[frames])?.pop().map(|(_, s)| s).expect("one checkpoint"))
    }

    /// States after each of the ascending frame counts, from one pass over the frames.
    pub fn run_checkpoints(&self, seed: u64, checkpoints: &[u64]) -> Result<Vec<(u64, CorrelatorState)>> {
        let mut blocks = Vec::new();
        let mut start = 0;
        for &cp in checkpoints {
            let mut s = start;
            while s < cp {
                let e = (s + BLOCK_FRAMES).min(cp);
                blocks.push((s, e));
                s = e;
            }
            start = start.max(cp);
        }
        let states: Vec<Result<CorrelatorState>> =
            blocks.par_iter().map(|&(s, e)| self.accumulate_range(seed, s, e)).collect();
        let mut total = self.new_state()?;
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut states = blocks.iter().zip(states).peekable();
        for &cp in checkpoints {
            while let Some(((_, e), _)) = states.peek() {
                if *e > cp {
                    break;
                }
                let (_, state) = states.next().expect("peeked");
                total.merge_from(&state?)?;
            }
            out.push((cp, total.clone()));
        }
        Ok(out)
    }

    /// Detected frames `0..frames`, delivered in order to `sink` one block at a time.
    pub fn generate(&self, seed: u64, frames: u64, mut sink: impl FnMut(Frame, Frame) -> Result<()>) -> Result<()> {
        let chunk = BLOCK_FRAMES * rayon::current_num_threads() as u64;
        let mut start = 0;
        while start < frames {
            let end = (start + chunk).min(frames);
            let pairs: Vec<Result<(Frame, Frame)>> =
                (start..end).into_par_iter().map(|k| self.frame_pair(seed, k)).collect();
            for pair in pairs {
                let (a, b) = pair?;
                sink(a, b)?;
            }
            start = end;
        }
        Ok(())
    }

    /// Detected frames `0..frames` as two in-memory stacks.
    pub fn generate_stacks(&self, seed: u64, frames: u64) -> Result<(FrameStack, FrameStack)> {
        let n = self.n();
        let mut one = FrameStack::new(n, n, seed);
        let mut two = FrameStack::new(n, n, seed);
        self.generate(seed, frames, |a, b| {
            one.push(a)?;
            two.push(b)
        })?;
        Ok((one, two))
    }
}

/// The reconstruction a method produces from a correlator state.
pub fn reconstruct(state: &CorrelatorState, method: Method) -> Result<Image> {
    match method {
        Method::Tpi => state.tpi_image(),
        Method::Gi => state.gi_image(),
        Method::Classical => Ok(state.classical_images()?.0),
    }
}

/// Run `f` on a dedicated pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| crate::error::invalid("run.threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
