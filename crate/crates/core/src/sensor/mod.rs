//! Photodetection, detector frames and on-disk formats.

mod detect;
mod frame;
mod pgm;
mod stack;

pub use detect::{
    detect, detect_intensity, Camera, NoiseModel, MAX_COUNT, POISSON_NORMAL_THRESHOLD, SATURATION_FRACTION,
};
pub use frame::{unflip, Frame};
pub use pgm::{
    decode_pgm, encode_pgm, read_pgm, to_display_samples, write_pgm16, write_pgm8, DisplayTransform, Pgm,
};
pub use stack::{
    read_pair_stack, read_stack, write_pair_stack, write_stack, FrameStack, StackHeader, StackReader,
    StackWriter, HEADER_LEN, MAGIC, VERSION,
};
