//! Depth-quality maps for RGB-D saliency, quality-guided fusion of RGB and
//! depth saliency predictions, and the usual salient-object evaluation
//! metrics.
//!
//! Maps are [`GrayMap`]s of `f64` in row-major order; color images are
//! [`RgbMap`]s of 8-bit sRGB.

pub mod edge_consistency;
pub mod error;
pub mod fusion;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model_variance;
pub mod raster;
pub mod regional_uncertainty;
pub mod superpixels;

pub use error::{Error, Result};
pub use raster::{GaussianPass, GrayMap, RgbMap};
