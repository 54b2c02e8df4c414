//! Image containers, file formats and unit conventions.
//!
//! Layers live in physically linear units and are stored as PFM. The LDR
//! composite is exposure-normalized, gamma-encoded with γ = 2.0 and stored as
//! 8-bit PNG.

mod files;
mod image;
mod ldr;
mod pfm;
mod units;

pub use files::{LayerFile, LayerStem};
pub use image::{Encoding, ImageRgb, ImageScalar};
pub use ldr::{read_png, write_png};
pub use pfm::{read_pfm, read_pfm_rgb, read_pfm_scalar, write_pfm, PfmImage};
pub use units::{
    exposure_normalize, gamma_decode, gamma_encode, luminance, nearest_rank_quantile,
    ExposureResult, STORAGE_GAMMA,
};
