//! TPIF frame-stack files.
//!
//! Little-endian layout: `b"TPIF"`, `u8` version (1), `u8` dtype (0 = u16),
//! `u16` reserved (0), `u32` width, `u32` height, `u64` frame count,
//! `u64` master seed, then the frames back to back, row-major `u16` samples.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::frame::Frame;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"TPIF";
pub const VERSION: u8 = 1;
pub const DTYPE_U16: u8 = 0;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackHeader {
    pub width: u32,
    pub height: u32,
    pub frame_count: u64,
    /// Master seed of the run that produced the stack (informational).
    pub seed: u64,
}

impl StackHeader {
    pub fn frame_bytes(&self) -> u64 {
        self.width as u64 * self.height as u64 * 2
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4] = VERSION;
        b[5] = DTYPE_U16;
        b[8..12].copy_from_slice(&self.width.to_le_bytes());
        b[12..16].copy_from_slice(&self.height.to_le_bytes());
        b[16..24].copy_from_slice(&self.frame_count.to_le_bytes());
        b[24..32].copy_from_slice(&self.seed.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER_LEN {
            return Err(Error::MalformedHeader(format!(
                "file is {} bytes, shorter than the {HEADER_LEN}-byte header",
                b.len()
            )));
        }
        if b[0..4] != MAGIC {
            return Err(Error::MalformedHeader(format!("bad magic {:02x?}", &b[0..4])));
        }
        if b[4] != VERSION {
            return Err(Error::VersionMismatch {
                found: b[4],
                expected: VERSION,
            });
        }
        if b[5] != DTYPE_U16 {
            return Err(Error::MalformedHeader(format!("unsupported dtype {}", b[5])));
        }
        if b[6] != 0 || b[7] != 0 {
            return Err(Error::MalformedHeader("reserved field is not zero".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().expect("4 bytes"));
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().expect("8 bytes"));
        let header = Self {
            width: u32_at(8),
            height: u32_at(12),
            frame_count: u64_at(16),
            seed: u64_at(24),
        };
        if header.width == 0 || header.height == 0 {
            return Err(Error::MalformedHeader("zero frame dimension".into()));
        }
        Ok(header)
    }
}

/// An ordered sequence of same-sized frames with its provenance seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameStack {
    width: usize,
    height: usize,
    seed: u64,
    frames: Vec<Frame>,
}

impl FrameStack {
    pub fn new(width: usize, height: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            seed,
            frames: Vec::new(),
        }
    }

    pub fn from_frames(width: usize, height: usize, seed: u64, frames: Vec<Frame>) -> Result<Self> {
        let mut stack = Self::new(width, height, seed);
        for f in frames {
            stack.push(f)?;
        }
        Ok(stack)
    }

    pub fn push(&mut self, frame: Frame) -> Result<()> {
        if frame.dims() != (self.width, self.height) {
            return Err(Error::DimensionMismatch {
                expected: (self.width, self.height),
                actual: frame.dims(),
            });
        }
        self.frames.push(frame);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn header(&self) -> StackHeader {
        StackHeader {
            width: self.width as u32,
            height: self.height as u32,
            frame_count: self.frames.len() as u64,
            seed: self.seed,
        }
    }
}

fn write_frame(out: &mut impl Write, frame: &Frame) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(frame.counts().len() * 2);
    for &c in frame.counts() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn write_stack(stack: &FrameStack, path: &Path) -> Result<()> {
    let mut w = StackWriter::create(path, stack.width, stack.height, stack.seed)?;
    for f in &stack.frames {
        w.push(f)?;
    }
    w.finish()
}

pub fn read_stack(path: &Path) -> Result<FrameStack> {
    let reader = StackReader::open(path)?;
    let header = *reader.header();
    let mut stack = FrameStack::new(header.width as usize, header.height as usize, header.seed);
    for frame in reader {
        stack.frames.push(frame?);
    }
    Ok(stack)
}

/// Writes frames as they arrive; the header count is patched on [`StackWriter::finish`].
pub struct StackWriter {
    out: BufWriter<File>,
    header: StackHeader,
}

impl StackWriter {
    pub fn create(path: &Path, width: usize, height: usize, seed: u64) -> Result<Self> {
        let header = StackHeader {
            width: width as u32,
            height: height as u32,
            frame_count: 0,
            seed,
        };
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&header.to_bytes())?;
        Ok(Self { out, header })
    }

    pub fn push(&mut self, frame: &Frame) -> Result<()> {
        let dims = (self.header.width as usize, self.header.height as usize);
        if frame.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: frame.dims(),
            });
        }
        write_frame(&mut self.out, frame)?;
        self.header.frame_count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        use std::io::Seek;
        self.out.flush()?;
        let mut file = self.out.into_inner().map_err(|e| e.into_error())?;
        file.seek(std::io::SeekFrom::Start(0))?;
        file.write_all(&self.header.to_bytes())?;
        file.sync_all()?;
        Ok(())
    }
}

/// Streams frames from a TPIF file one at a time.
///
/// The payload length is validated against the header on open, so truncation
/// and trailing bytes are reported before any frame is consumed.
pub struct StackReader {
    input: BufReader<File>,
    header: StackHeader,
    next: u64,
}

impl StackReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        let mut input = BufReader::new(file);
        let mut head = Vec::with_capacity(HEADER_LEN);
        (&mut input).take(HEADER_LEN as u64).read_to_end(&mut head)?;
        let header = StackHeader::from_bytes(&head)?;
        let payload = len - HEADER_LEN as u64;
        let frame_bytes = header.frame_bytes();
        let declared = header
            .frame_count
            .checked_mul(frame_bytes)
            .ok_or_else(|| Error::MalformedHeader("declared payload overflows".into()))?;
        if payload < declared {
            return Err(Error::TruncatedPayload {
                declared: header.frame_count,
                found: payload / frame_bytes,
            });
        }
        if payload > declared {
            return Err(Error::TrailingData(payload - declared));
        }
        Ok(Self { input, header, next: 0 })
    }

    pub fn header(&self) -> &StackHeader {
        &self.header
    }

    fn read_frame(&mut self) -> Result<Frame> {
        let (w, h) = (self.header.width as usize, self.header.height as usize);
        let mut buf = vec![0u8; w * h * 2];
        self.input.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::TruncatedPayload {
                declared: self.header.frame_count,
                found: self.next,
            },
            _ => Error::Io(e),
        })?;
        let counts = buf.chunks_exact(2).map(|b| u16::from_le_bytes([b[0], b[1]])).collect();
        Frame::new(w, h, counts)
    }
}

impl Iterator for StackReader {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.header.frame_count {
            return None;
        }
        let frame = self.read_frame();
        self.next += 1;
        Some(frame)
    }
}

/// Interleave two synchronized stacks (camera 1, camera 2, camera 1, …) into one file.
pub fn write_pair_stack(cam1: &FrameStack, cam2: &FrameStack, path: &Path) -> Result<()> {
    if cam1.len() != cam2.len() || (cam1.width, cam1.height) != (cam2.width, cam2.height) {
        return Err(Error::DimensionMismatch {
            expected: (cam1.width, cam1.len()),
            actual: (cam2.width, cam2.len()),
        });
    }
    let mut w = StackWriter::create(path, cam1.width, cam1.height, cam1.seed)?;
    for (a, b) in cam1.frames.iter().zip(&cam2.frames) {
        w.push(a)?;
        w.push(b)?;
    }
    w.finish()
}

/// Split an interleaved pair-stack back into camera 1 and camera 2 stacks.
pub fn read_pair_stack(path: &Path) -> Result<(FrameStack, FrameStack)> {
    let all = read_stack(path)?;
    if all.len() % 2 != 0 {
        return Err(Error::MalformedHeader(format!(
            "pair-stack holds an odd number of frames ({})",
            all.len()
        )));
    }
    let (w, h, seed) = (all.width, all.height, all.seed);
    let mut one = FrameStack::new(w, h, seed);
    let mut two = FrameStack::new(w, h, seed);
    for (i, f) in all.frames.into_iter().enumerate() {
        if i % 2 == 0 {
            one.frames.push(f);
        } else {
            two.frames.push(f);
        }
    }
    Ok((one, two))
}
