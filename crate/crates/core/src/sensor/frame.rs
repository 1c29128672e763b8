use crate::error::{Error, Result};
use crate::optics::mirror_columns;

/// One detector readout: 16-bit photon counts, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    counts: Vec<u16>,
}

impl Frame {
    pub fn new(width: usize, height: usize, counts: Vec<u16>) -> Result<Self> {
        if counts.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                actual: (counts.len(), 1),
            });
        }
        Ok(Self { width, height, counts })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            counts: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn into_counts(self) -> Vec<u16> {
        self.counts
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.counts[row * self.width + col]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// Reverse the column order, undoing the reflected arm's mirror.
pub fn unflip(frame: &Frame) -> Frame {
    Frame {
        width: frame.width,
        height: frame.height,
        counts: mirror_columns(&frame.counts, frame.width),
    }
}
