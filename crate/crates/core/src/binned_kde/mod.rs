//! Binned kernel density estimators: a sparse kernel sum over grid weights
//! and a grid convolution solved by FFT.

mod fft;
mod fkde;
mod sbkde;

pub use fkde::{
    padded_elements, padded_size, truncation_radii, FkdeCpd, FkdeGuardConfig, FkdeModel, DENSITY_FLOOR,
};
pub use sbkde::{SbkdeCpd, SbkdeModel};
