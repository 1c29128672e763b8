//! Scalar field representation and the deterministic optical elements.

pub mod fft;
mod field;
mod layout;
mod lens;
mod propagate;
mod splitter;

pub use field::{new_plane_wave, total_power, ComplexField};
pub(crate) use field::{check_grid, check_positive};
pub use layout::{validate_layout, OpticalLayout, IMAGING_TOLERANCE, PATH_TOLERANCE};
pub use lens::{apply_thin_lens, image_distance, wavenumber, ImagingSystem};
pub(crate) use lens::invert;
pub use propagate::{check_sampling, propagate, sampling_ratio, transfer_function};
pub use splitter::beam_split;
pub(crate) use splitter::mirror_columns;
