//! Closed-form somb point-spread function and image predictions.

mod bessel;
mod psf;

pub use bessel::{bessel_j1, bisect, first_j1_zero, half_max_argument, somb};
pub use psf::{
    analytic_fwhm_pixels, fwhm, image_coordinate, image_fwhm, object_coordinate, predicted_classical_image,
    predicted_g1, predicted_g1_diagonal, predicted_tpi_image, predicted_tpi_image_squared_kernel, PsfSpec,
};
