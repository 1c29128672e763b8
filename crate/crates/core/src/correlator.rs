//! Streaming, mergeable correlation estimators over synchronized frame pairs.
//!
//! All accumulators are exact integer sums of 16-bit counts, so accumulation
//! order, chunking and merge order never change the result; images are formed
//! from the exact sums with a single final rounding per pixel.

use crate::error::{Error, Result};
use crate::image::Image;
use crate::sensor::{unflip, Frame};

/// Largest ROI side usable for full pair correlation.
pub const MAX_ROI_PIXELS: usize = 256;

/// Rectangular region of interest for pair correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Self { x0, y0, width, height }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat frame indices of the ROI pixels, row-major.
    pub fn pixels(&self, frame_width: usize) -> Vec<usize> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (self.y0 + r) * frame_width + self.x0 + c))
            .collect()
    }
}

/// What the ghost-imaging "bucket" of camera 2 measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BucketMode {
    /// Sum over the whole camera-2 frame.
    #[default]
    WholeFrame,
    /// A single camera-2 pixel `(row, col)`.
    Pixel(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
struct PairState {
    roi: Roi,
    pixels: Vec<usize>,
    sum_pair: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorState {
    width: usize,
    height: usize,
    bucket: BucketMode,
    n_frames: u64,
    sum1: Vec<u64>,
    sum2: Vec<u64>,
    sum_prod: Vec<u64>,
    sum_bucket: u128,
    sum_bucket_sq: u128,
    sum1_bucket: Vec<u128>,
    pair: Option<PairState>,
}

/// Unbiased covariance from exact sums: (n·Σab − Σa·Σb) / (n(n−1)).
fn covariance(n: u64, sum_ab: u128, sum_a: u128, sum_b: u128) -> f64 {
    let num = n as i128 * sum_ab as i128 - (sum_a as i128) * (sum_b as i128);
    num as f64 / (n as f64 * (n - 1) as f64)
}

impl CorrelatorState {
    pub fn new(width: usize, height: usize) -> Self {
        let len = width * height;
        Self {
            width,
            height,
            bucket: BucketMode::WholeFrame,
            n_frames: 0,
            sum1: vec![0; len],
            sum2: vec![0; len],
            sum_prod: vec![0; len],
            sum_bucket: 0,
            sum_bucket_sq: 0,
            sum1_bucket: vec![0; len],
            pair: None,
        }
    }

    pub fn with_bucket(mut self, bucket: BucketMode) -> Result<Self> {
        if let BucketMode::Pixel(r, c) = bucket {
            if r >= self.height || c >= self.width {
                return Err(crate::error::invalid("bucket", "bucket pixel outside the frame"));
            }
        }
        self.bucket = bucket;
        Ok(self)
    }

    /// Enable full pair correlation over `roi` (at most 16×16 pixels).
    pub fn with_roi(mut self, roi: Roi) -> Result<Self> {
        if roi.len() > MAX_ROI_PIXELS || roi.width > 16 || roi.height > 16 {
            return Err(Error::RoiTooLarge(roi.len()));
        }
        if roi.is_empty() || roi.x0 + roi.width > self.width || roi.y0 + roi.height > self.height {
            return Err(crate::error::invalid("roi", "ROI must be non-empty and inside the frame"));
        }
        self.pair = Some(PairState {
            roi,
            pixels: roi.pixels(self.width),
            sum_pair: vec![0; roi.len() * roi.len()],
        });
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_frames(&self) -> u64 {
        self.n_frames
    }

    pub fn bucket_mode(&self) -> BucketMode {
        self.bucket
    }

    pub fn roi(&self) -> Option<Roi> {
        self.pair.as_ref().map(|p| p.roi)
    }

    pub fn sum1(&self) -> &[u64] {
        &self.sum1
    }

    pub fn sum2(&self) -> &[u64] {
        &self.sum2
    }

    pub fn sum_prod(&self) -> &[u64] {
        &self.sum_prod
    }

    pub fn sum_bucket(&self) -> u128 {
        self.sum_bucket
    }

    pub fn sum_bucket_sq(&self) -> u128 {
        self.sum_bucket_sq
    }

    pub fn sum1_bucket(&self) -> &[u128] {
        &self.sum1_bucket
    }

    fn check_frame(&self, frame: &Frame) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: frame.dims(),
            });
        }
        Ok(())
    }

    /// Add one synchronized pair; `frame2` is un-flipped first when `align_flip`.
    pub fn accumulate(&mut self, frame1: &Frame, frame2: &Frame, align_flip: bool) -> Result<()> {
        self.check_frame(frame1)?;
        self.check_frame(frame2)?;
        let flipped;
        let f2 = if align_flip {
            flipped = unflip(frame2);
            &flipped
        } else {
            frame2
        };
        let (a, b) = (frame1.counts(), f2.counts());
        let bucket: u128 = match self.bucket {
            BucketMode::WholeFrame => f2.total() as u128,
            BucketMode::Pixel(r, c) => b[r * self.width + c] as u128,
        };
        for i in 0..a.len() {
            let (x, y) = (a[i] as u64, b[i] as u64);
            self.sum1[i] += x;
            self.sum2[i] += y;
            self.sum_prod[i] += x * y;
            self.sum1_bucket[i] += x as u128 * bucket;
        }
        self.sum_bucket += bucket;
        self.sum_bucket_sq += bucket * bucket;
        if let Some(pair) = self.pair.as_mut() {
            let len = pair.pixels.len();
            for (i, &pi) in pair.pixels.iter().enumerate() {
                let x = a[pi] as u64;
                let row = &mut pair.sum_pair[i * len..(i + 1) * len];
                for (acc, &pj) in row.iter_mut().zip(&pair.pixels) {
                    *acc += x * b[pj] as u64;
                }
            }
        }
        self.n_frames += 1;
        Ok(())
    }

    /// Component-wise sum of two states over disjoint frame sets.
    pub fn merge(&self, other: &CorrelatorState) -> Result<CorrelatorState> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    pub fn merge_from(&mut self, other: &CorrelatorState) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (other.width, other.height),
            });
        }
        if self.bucket != other.bucket || self.roi() != other.roi() {
            return Err(crate::error::invalid(
                "merge",
                "states were initialized with different bucket or ROI settings",
            ));
        }
        self.n_frames += other.n_frames;
        let add = |a: &mut [u64], b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.sum1, &other.sum1);
        add(&mut self.sum2, &other.sum2);
        add(&mut self.sum_prod, &other.sum_prod);
        self.sum1_bucket.iter_mut().zip(&other.sum1_bucket).for_each(|(x, y)| *x += y);
        self.sum_bucket += other.sum_bucket;
        self.sum_bucket_sq += other.sum_bucket_sq;
        if let (Some(a), Some(b)) = (self.pair.as_mut(), other.pair.as_ref()) {
            add(&mut a.sum_pair, &b.sum_pair);
        }
        Ok(())
    }

    fn require(&self, needed: u64) -> Result<()> {
        if self.n_frames < needed {
            return Err(Error::InsufficientFrames {
                needed,
                have: self.n_frames,
            });
        }
        Ok(())
    }

    fn image(&self, f: impl Fn(usize) -> f64) -> Image {
        Image::new(self.width, self.height, (0..self.width * self.height).map(f).collect())
            .expect("dimensions are consistent")
    }

    /// Per-pixel unbiased covariance ⟨Δn₁(ρ)Δn₂(ρ)⟩.
    pub fn tpi_image(&self) -> Result<Image> {
        self.require(2)?;
        let n = self.n_frames;
        Ok(self.image(|i| {
            covariance(n, self.sum_prod[i] as u128, self.sum1[i] as u128, self.sum2[i] as u128)
        }))
    }

    /// Per-pixel unbiased covariance between camera 1 and the camera-2 bucket.
    pub fn gi_image(&self) -> Result<Image> {
        self.require(2)?;
        let n = self.n_frames;
        Ok(self.image(|i| covariance(n, self.sum1_bucket[i], self.sum1[i] as u128, self.sum_bucket)))
    }

    /// Mean images of camera 1 and camera 2.
    pub fn classical_images(&self) -> Result<(Image, Image)> {
        self.require(1)?;
        let n = self.n_frames as f64;
        Ok((
            self.image(|i| self.sum1[i] as f64 / n),
            self.image(|i| self.sum2[i] as f64 / n),
        ))
    }

    /// Per-pixel ⟨n₁n₂⟩.
    pub fn mean_product_image(&self) -> Result<Image> {
        self.require(1)?;
        let n = self.n_frames as f64;
        Ok(self.image(|i| self.sum_prod[i] as f64 / n))
    }

    /// Unbiased variance of the bucket signal.
    pub fn bucket_variance(&self) -> Result<f64> {
        self.require(2)?;
        Ok(covariance(self.n_frames, self.sum_bucket_sq, self.sum_bucket, self.sum_bucket))
    }

    /// ⟨n₁n₂⟩ split into the product of classical images and the fluctuation term.
    pub fn g2_decomposition(&self) -> Result<G2Decomposition> {
        let mean_product = self.mean_product_image()?;
        let (c1, c2) = self.classical_images()?;
        let classical_product = self.image(|i| c1.data()[i] * c2.data()[i]);
        let tpi = self.tpi_image()?;
        let bias = (self.n_frames - 1) as f64 / self.n_frames as f64;
        Ok(G2Decomposition {
            mean_product,
            classical_product,
            fluctuation: tpi.map(|v| v * bias),
        })
    }

    /// Full covariance between every camera-1 and camera-2 pixel of the ROI.
    pub fn pair_correlation(&self) -> Result<PairCorrelation> {
        let pair = self.pair.as_ref().ok_or(Error::RoiNotEnabled)?;
        self.require(2)?;
        let n = self.n_frames;
        let len = pair.pixels.len();
        let mut values = Vec::with_capacity(len * len);
        for (i, &pi) in pair.pixels.iter().enumerate() {
            for (j, &pj) in pair.pixels.iter().enumerate() {
                values.push(covariance(
                    n,
                    pair.sum_pair[i * len + j] as u128,
                    self.sum1[pi] as u128,
                    self.sum2[pj] as u128,
                ));
            }
        }
        Ok(PairCorrelation { roi: pair.roi, values })
    }
}

/// The three per-pixel terms of ⟨n₁n₂⟩ = ⟨n₁⟩⟨n₂⟩ + ⟨Δn₁Δn₂⟩ (population normalization).
#[derive(Debug, Clone, PartialEq)]
pub struct G2Decomposition {
    pub mean_product: Image,
    pub classical_product: Image,
    pub fluctuation: Image,
}

impl G2Decomposition {
    /// Largest |mean_product − classical_product − fluctuation| relative to the peak of mean_product.
    pub fn max_relative_residual(&self) -> f64 {
        let peak = self.mean_product.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = self
            .mean_product
            .data()
            .iter()
            .zip(self.classical_product.data())
            .zip(self.fluctuation.data())
            .map(|((m, c), f)| (m - c - f).abs())
            .fold(0.0, f64::max);
        if peak > 0.0 {
            worst / peak
        } else {
            worst
        }
    }
}

/// Covariance over ROI pixel pairs; `values[i * len + j]` pairs camera-1 pixel i with camera-2 pixel j.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelation {
    pub roi: Roi,
    pub values: Vec<f64>,
}

impl PairCorrelation {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.roi.len() + j]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.roi.len()).map(|i| self.get(i, i)).collect()
    }
}

/// Accumulate paired frames in order.
pub fn accumulate_all(state: &mut CorrelatorState, cam1: &[Frame], cam2: &[Frame], align_flip: bool) -> Result<()> {
    if cam1.len() != cam2.len() {
        return Err(Error::DimensionMismatch {
            expected: (cam1.len(), 1),
            actual: (cam2.len(), 1),
        });
    }
    for (a, b) in cam1.iter().zip(cam2) {
        state.accumulate(a, b, align_flip)?;
    }
    Ok(())
}

/// TPI signal for one pairing lag (camera-2 frame k + lag paired with camera-1 frame k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagReport {
    pub lag: i64,
    pub pairs: u64,
    /// Mean of the TPI image: a large value signals correlated pairing.
    pub mean_covariance: f64,
    /// NCC of this lag's TPI image against the lag-0 image.
    pub ncc_vs_lag0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub lags: Vec<LagReport>,
    pub best_lag: i64,
}

impl SyncReport {
    pub fn in_sync(&self) -> bool {
        self.best_lag == 0
    }
}

/// Compare TPI images formed at pairing lags −1, 0, +1 to detect off-by-one pairing.
pub fn diagnose_sync(cam1: &[Frame], cam2: &[Frame], align_flip: bool) -> Result<SyncReport> {
    if cam1.len() != cam2.len() {
        return Err(Error::DimensionMismatch {
            expected: (cam1.len(), 1),
            actual: (cam2.len(), 1),
        });
    }
    if cam1.len() < 4 {
        return Err(Error::InsufficientFrames {
            needed: 4,
            have: cam1.len() as u64,
        });
    }
    let (w, h) = cam1[0].dims();
    let lagged = |lag: i64| -> Result<Image> {
        let mut state = CorrelatorState::new(w, h);
        let len = cam1.len() as i64;
        for k in 0..len {
            let j = k + lag;
            if (0..len).contains(&j) {
                state.accumulate(&cam1[k as usize], &cam2[j as usize], align_flip)?;
            }
        }
        state.tpi_image()
    };
    let base = lagged(0)?;
    let mut lags = Vec::new();
    for lag in [-1i64, 0, 1] {
        let img = if lag == 0 { base.clone() } else { lagged(lag)? };
        let mean = img.data().iter().sum::<f64>() / img.data().len() as f64;
        lags.push(LagReport {
            lag,
            pairs: (cam1.len() as i64 - lag.abs()) as u64,
            mean_covariance: mean,
            ncc_vs_lag0: crate::metrics::ncc(&img, &base).ok(),
        });
    }
    let best_lag = lags
        .iter()
        .max_by(|a, b| a.mean_covariance.total_cmp(&b.mean_covariance))
        .map(|l| l.lag)
        .unwrap_or(0);
    Ok(SyncReport { lags, best_lag })
}
