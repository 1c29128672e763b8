//! Binary PGM (P5) images.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Decoded P5 image; `samples` holds raw values up to `maxval`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

/// How real-valued images are mapped onto 16-bit samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisplayTransform {
    /// Negative values become 0; the peak maps to 65535.
    #[default]
    ClampAtZero,
    /// Minimum maps to 0 and maximum to 65535.
    FullRange,
}

/// Quantize an image for display.
pub fn to_display_samples(image: &Image, transform: DisplayTransform) -> Vec<u16> {
    let data = image.data();
    let (lo, hi) = match transform {
        DisplayTransform::ClampAtZero => (0.0, image.max().max(0.0)),
        DisplayTransform::FullRange => {
            let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
            (lo, image.max())
        }
    };
    let span = hi - lo;
    data.iter()
        .map(|&v| {
            if !(span > 0.0) {
                0
            } else {
                (((v - lo) / span).clamp(0.0, 1.0) * u16::MAX as f64).round() as u16
            }
        })
        .collect()
}

pub fn encode_pgm(width: usize, height: usize, maxval: u16, samples: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    if maxval > 255 {
        for &s in samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(samples.iter().map(|&s| s as u8));
    }
    out
}

/// Write a 16-bit P5 image (big-endian samples).
pub fn write_pgm16(path: &Path, image: &Image, transform: DisplayTransform) -> Result<()> {
    let samples = to_display_samples(image, transform);
    std::fs::write(path, encode_pgm(image.width(), image.height(), u16::MAX, &samples))?;
    Ok(())
}

pub fn write_pgm8(path: &Path, width: usize, height: usize, samples: &[u8]) -> Result<()> {
    let wide: Vec<u16> = samples.iter().map(|&s| s as u16).collect();
    std::fs::write(path, encode_pgm(width, height, 255, &wide))?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<Pgm> {
    let bytes = std::fs::read(path)?;
    decode_pgm(&bytes).map_err(|reason| Error::ImageFormat {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<Pgm, String> {
    let mut pos = 0;
    let mut token = || -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    if magic != "P5" {
        return Err(format!("expected P5 magic, found {magic:?}"));
    }
    let mut number = |what: &str| -> std::result::Result<usize, String> {
        let t = token()?;
        t.parse().map_err(|_| format!("invalid {what} {t:?}"))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if width == 0 || height == 0 {
        return Err("zero dimension".into());
    }
    if maxval == 0 || maxval > u16::MAX as usize {
        return Err(format!("maxval {maxval} out of range"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let raster = bytes.get(pos..).unwrap_or(&[]);
    let bytes_per = if maxval > 255 { 2 } else { 1 };
    let needed = width * height * bytes_per;
    if raster.len() < needed {
        return Err(format!("raster holds {} bytes, expected {needed}", raster.len()));
    }
    let samples = if bytes_per == 2 {
        raster[..needed].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])).collect()
    } else {
        raster[..needed].iter().map(|&b| b as u16).collect()
    };
    Ok(Pgm {
        width,
        height,
        maxval: maxval as u16,
        samples,
    })
}
