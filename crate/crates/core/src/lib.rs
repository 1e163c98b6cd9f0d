//! Soccer pitch line-mark segmentation and classification.
//!
//! The pipeline has three stages:
//!
//! 1. [`imaging::enhance_lines`] turns an RGB frame into a gray relief where
//!    only thin white structures survive (per-channel Top-Hat, then minimum).
//! 2. [`watershed::stochastic_watershed`] floods that relief from many random
//!    marker sets and counts how often each pixel ends up on a watershed line;
//!    [`watershed::binarize_lines`] keeps the stable ones inside the field.
//! 3. [`classify::classify_pipeline`] links the line pixels into straight
//!    lines and ellipses.
//!
//! [`eval`] scores results against annotated masks, [`baselines`] holds the
//! edge-detector and Hough references, and [`synth`] renders synthetic pitch
//! images with exact ground truth.

pub mod baselines;
pub mod classify;
pub mod config;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod pipeline;
pub mod synth;
pub mod watershed;

pub use error::{Error, Result};
