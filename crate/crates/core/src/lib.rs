//! Light-transport layer decomposition toolkit.
//!
//! An image is modelled as `C = O · (ρ · I + S)`: an occlusion (visibility)
//! factor, diffuse irradiance, albedo and specular shading. The directional
//! variant splits the illumination into six soft-cube lobes and sums the
//! reflected contribution of each.
//!
//! Modules:
//!
//! - [`imagio`]: image containers, PFM/PNG I/O, gamma and exposure handling.
//! - [`model`]: composition operators, intrinsic reduction, recombination residuals.
//! - [`basis`]: directions, the soft-cube partition of unity, SH9 irradiance, lat-long maps.
//! - [`prefilter`]: irradiance and normalized Phong-lobe prefiltered maps.
//! - [`datagen`]: procedural scenes, ray-cast layer rendering, dataset generation.
//! - [`refine`]: per-pixel refinement of coarse layers against a high-resolution image.
//! - [`metrics`]: L2, NRMSE, DSSIM and decomposition reports.

// Channel loops over fixed-size arrays read better indexed; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod datagen;
mod error;
pub mod imagio;
pub mod metrics;
pub mod model;
pub mod prefilter;
pub mod refine;

pub use error::{Error, Result};
