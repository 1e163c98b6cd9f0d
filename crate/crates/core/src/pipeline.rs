//! End-to-end detection: line enhancement, stochastic watershed,
//! thresholding inside the field, and primitive classification.

use crate::classify::{classify_pipeline, ClassificationResult, PixelLabel};
use crate::config::RunConfig;
use crate::error::Result;
use crate::imaging::{enhance_lines, top_hat, BinaryMask, RasterImage};
use crate::watershed::{binarize_lines, stochastic_watershed, ProbabilityImage};

#[derive(Clone, Debug)]
pub struct Detection {
    /// Line-enhanced relief fed to the watershed.
    pub relief: RasterImage,
    pub probability: ProbabilityImage,
    /// Line pixels: probability above threshold inside the field.
    pub mask: BinaryMask,
    pub classification: ClassificationResult,
}

/// Relief image: minimum of per-channel Top-Hats for RGB, plain Top-Hat for
/// gray, lowered by the relief floor and clipped at zero.
pub fn relief(image: &RasterImage, cfg: &RunConfig) -> Result<RasterImage> {
    let se = cfg.structuring_element()?;
    let hat = if image.channels() == 3 { enhance_lines(image, &se)? } else { top_hat(image, &se)? };
    if cfg.relief_floor == 0.0 {
        return Ok(hat);
    }
    let (h, w) = hat.dims();
    let floor = cfg.relief_floor;
    RasterImage::new(h, w, 1, hat.samples().iter().map(|v| (v - floor).max(0.0)).collect())
}

/// Segmentation only: relief, probability image and line mask.
pub fn segment(image: &RasterImage, field: &BinaryMask, cfg: &RunConfig) -> Result<(RasterImage, ProbabilityImage, BinaryMask)> {
    cfg.validate()?;
    field.require_dims(image.dims())?;
    let relief = relief(image, cfg)?;
    let (h, w) = image.dims();
    let probability = stochastic_watershed(&relief, &cfg.stochastic(h, w))?;
    let mask = binarize_lines(&probability, field, cfg.threshold)?;
    Ok((relief, probability, mask))
}

pub fn detect(image: &RasterImage, field: &BinaryMask, cfg: &RunConfig) -> Result<Detection> {
    let (relief, probability, mask) = segment(image, field, cfg)?;
    let classification = classify_pipeline(&mask, &cfg.classify)?;
    Ok(Detection { relief, probability, mask, classification })
}

pub const OVERLAY_LINE: [f64; 3] = [0.0, 0.25, 1.0];
pub const OVERLAY_ELLIPSE: [f64; 3] = [0.6, 0.1, 0.8];
pub const OVERLAY_DISCARDED: [f64; 3] = [1.0, 0.0, 0.0];

/// Input image with classified pixels painted: lines blue, ellipses purple,
/// discarded line pixels red.
pub fn overlay(image: &RasterImage, classification: &ClassificationResult) -> Result<RasterImage> {
    let (h, w) = image.dims();
    let dims = classification.dims();
    if dims != (h, w) {
        return Err(crate::Error::DimensionMismatch { expected: (h, w), actual: dims });
    }
    let mut samples = Vec::with_capacity(h * w * 3);
    for r in 0..h {
        for c in 0..w {
            let color = match classification.label(r, c) {
                PixelLabel::Line => Some(OVERLAY_LINE),
                PixelLabel::Ellipse => Some(OVERLAY_ELLIPSE),
                PixelLabel::Discarded => Some(OVERLAY_DISCARDED),
                PixelLabel::Background => None,
            };
            match color {
                Some(rgb) => samples.extend(rgb),
                None if image.channels() == 3 => samples.extend((0..3).map(|k| image.get(r, c, k))),
                None => samples.extend([image.gray(r, c); 3]),
            }
        }
    }
    RasterImage::new(h, w, 3, samples)
}
