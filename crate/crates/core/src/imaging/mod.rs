//! Raster carriers and the Top-Hat preprocessing that turns an RGB frame into
//! the contrast-enhanced gray relief fed to the watershed.

pub mod io;
mod morphology;
mod raster;

pub use morphology::{dilate, enhance_lines, erode, morphological_open, top_hat};
pub use raster::{BinaryMask, RasterImage, StructuringElement};
