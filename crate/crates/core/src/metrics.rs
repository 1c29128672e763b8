//! Image-quality metrics and frame-count convergence studies.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::optics::invert;
use crate::pipeline::Pipeline;
use crate::scene::ObjectMask;

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    Ok(())
}

/// Pearson correlation over pixels.
pub fn ncc(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let n = a.data().len() as f64;
    let ma = a.data().iter().sum::<f64>() / n;
    let mb = b.data().iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::ConstantImage);
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Root-mean-square difference after normalizing both images to unit peak.
pub fn rmse(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let (a, b) = (a.unit_peak()?, b.unit_peak()?);
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((sum / a.data().len() as f64).sqrt())
}

/// ‖estimate − α·reference‖ / ‖α·reference‖ with α the least-squares scale.
pub fn relative_rms(estimate: &Image, reference: &Image) -> Result<f64> {
    check_dims(estimate, reference)?;
    let rr: f64 = reference.data().iter().map(|r| r * r).sum();
    if rr == 0.0 {
        return Err(Error::ZeroImage);
    }
    let er: f64 = estimate.data().iter().zip(reference.data()).map(|(e, r)| e * r).sum();
    let alpha = er / rr;
    let resid: f64 = estimate
        .data()
        .iter()
        .zip(reference.data())
        .map(|(e, r)| (e - alpha * r).powi(2))
        .sum();
    Ok(resid.sqrt() / (alpha.abs() * rr.sqrt()))
}

/// Signal and background regions on the detector grid derived from an object mask.
///
/// The mask is point-inverted onto detector coordinates; background pixels lie
/// farther than `erosion_radius` pixels from every signal pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Regions {
    pub signal: Vec<bool>,
    pub background: Vec<bool>,
}

impl Regions {
    pub fn from_mask(mask: &ObjectMask, erosion_radius: f64) -> Self {
        let n = mask.width();
        let signal: Vec<bool> = invert(mask.reflectance(), n).iter().map(|&r| r > 0.0).collect();
        let rad = erosion_radius.max(0.0);
        let reach = rad.ceil() as i64;
        let mut near = signal.clone();
        let ni = n as i64;
        for (idx, _) in signal.iter().enumerate().filter(|(_, &s)| s) {
            let (r, c) = ((idx / n) as i64, (idx % n) as i64);
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr < 0 || cc < 0 || rr >= ni || cc >= ni {
                        continue;
                    }
                    if ((dr * dr + dc * dc) as f64) <= rad * rad {
                        near[(rr * ni + cc) as usize] = true;
                    }
                }
            }
        }
        Self {
            signal,
            background: near.iter().map(|&b| !b).collect(),
        }
    }
}

/// Contrast-to-noise ratio (mean_signal − mean_background)/std_background, floored at zero.
///
/// A noiseless background with positive contrast gives `+∞`.
pub fn cnr(image: &Image, regions: &Regions) -> Result<f64> {
    let data = image.data();
    if regions.signal.len() != data.len() {
        return Err(Error::DimensionMismatch {
            expected: image.dims(),
            actual: (regions.signal.len(), 1),
        });
    }
    let pick = |sel: &[bool]| -> Vec<f64> { data.iter().zip(sel).filter(|(_, &s)| s).map(|(&v, _)| v).collect() };
    let sig = pick(&regions.signal);
    let bg = pick(&regions.background);
    if sig.is_empty() || bg.len() < 2 {
        return Err(crate::error::invalid("cnr", "signal or background region is empty"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ms, mb) = (mean(&sig), mean(&bg));
    let var = bg.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / (bg.len() - 1) as f64;
    if var == 0.0 {
        return Ok(if ms > mb { f64::INFINITY } else { 0.0 });
    }
    Ok(((ms - mb) / var.sqrt()).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Tpi,
    Gi,
    Classical,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Tpi, Method::Gi, Method::Classical];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tpi => "tpi",
            Method::Gi => "gi",
            Method::Classical => "classical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tpi" => Ok(Method::Tpi),
            "gi" => Ok(Method::Gi),
            "classical" => Ok(Method::Classical),
            _ => Err(crate::error::invalid("method", format!("unknown method `{s}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub method: Method,
    pub frames: u64,
    pub seed: u64,
    pub ncc: f64,
    pub rmse: f64,
    pub cnr: f64,
}

pub const REPORT_HEADER: &str = "method,frames,seed,ncc,rmse,cnr";

/// CSV table with one row per report; unavailable metrics are written as `nan`.
pub fn reports_to_csv(reports: &[MetricReport]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(out, "{},{},{},{},{},{}", r.method, r.frames, r.seed, r.ncc, r.rmse, r.cnr)
            .expect("writing to a String cannot fail");
    }
    out
}

pub fn reports_from_csv(text: &str) -> Result<Vec<MetricReport>> {
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(crate::error::invalid("report", "missing or unexpected CSV header"));
    }
    let bad = |line: &str| crate::error::invalid("report", format!("malformed row `{line}`"));
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            let int = |s: &str| s.parse::<u64>().map_err(|_| bad(line));
            Ok(MetricReport {
                method: Method::parse(f[0])?,
                frames: int(f[1])?,
                seed: int(f[2])?,
                ncc: num(f[3])?,
                rmse: num(f[4])?,
                cnr: num(f[5])?,
            })
        })
        .collect()
}

/// Score one reconstruction against its ground truth; failures become NaN.
pub fn score(method: Method, frames: u64, seed: u64, image: &Image, truth: &Image, regions: &Regions) -> MetricReport {
    MetricReport {
        method,
        frames,
        seed,
        ncc: ncc(image, truth).unwrap_or(f64::NAN),
        rmse: rmse(image, truth).unwrap_or(f64::NAN),
        cnr: cnr(image, regions).unwrap_or(f64::NAN),
    }
}

/// Metrics for every (seed, frame count, method) cell, ordered by seed, frames, method.
pub fn convergence_study(pipeline: &Pipeline, frame_counts: &[u64], seeds: &[u64]) -> Result<Vec<MetricReport>> {
    if frame_counts.is_empty() || frame_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(crate::error::invalid("frame_counts", "must be non-empty and strictly ascending"));
    }
    let truths = pipeline.truths()?;
    let regions = pipeline.regions();
    let per_seed: Vec<Result<Vec<MetricReport>>> = seeds
        .par_iter()
        .map(|&seed| {
            let checkpoints = pipeline.run_checkpoints(seed, frame_counts)?;
            let mut rows = Vec::new();
            for (frames, state) in checkpoints {
                for method in Method::ALL {
                    let image = crate::pipeline::reconstruct(&state, method)?;
                    rows.push(score(method, frames, seed, &image, truths.for_method(method), &regions));
                }
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for rows in per_seed {
        out.extend(rows?);
    }
    Ok(out)
}

/// Spearman rank correlation of two equally long samples (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let a = Image::new(rx.len(), 1, rx).expect("1-D");
    let b = Image::new(ry.len(), 1, ry).expect("1-D");
    ncc(&a, &b).unwrap_or(0.0)
}
