//! Line-mask classification: skeleton regions are fitted with straight lines
//! and ellipses, split, merged and pruned into labeled primitives.

pub mod fit;
mod regions;
mod steps;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use fit::{fit_ellipse, fit_line, Ellipse, Moments, StraightLine};
pub use regions::{
    bridge_gaps, extract_regions, extract_regions_with_skeleton, prune_spurs, remove_junctions, skeletonize, thin,
    trace_regions, Region,
};
pub use steps::{classify_pipeline, initial_classify, merge_ellipses, merge_lines, refine, split_region};

use crate::error::{Error, Result};
use crate::imaging::{io, BinaryMask};

/// Thresholds of the classification steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Line rmse below which a region needs no splitting (px).
    pub rmse_line: f64,
    /// Joint-fit rmse accepted when merging (px).
    pub rmse_merge: f64,
    /// Breaks in the mask of up to twice this many pixels are closed before
    /// thinning (px).
    pub gap_radius: usize,
    /// Skeleton end branches up to this length that end in a junction are
    /// pruned before junctions are cut (px).
    pub spur_length: usize,
    /// Regions and primitives smaller than this are not representative (px).
    pub min_region: usize,
    /// Support pixels farther than this from their model are pruned (px).
    pub dist_max: f64,
    /// Merge candidates must have bounding boxes within this fraction of the image diagonal.
    pub merge_window: f64,
    /// An ellipse may absorb a region only if the joint rmse is at most the
    /// best current rmse plus this slack (px).
    pub ellipse_slack: f64,
    /// A region is labeled ellipse only if its ellipse rmse beats its line
    /// rmse by more than this margin (px).
    pub ellipse_margin: f64,
    /// Mask pixels inherit the label of support pixels within this radius,
    /// provided they lie within this radius or twice the model rmse of the
    /// model, and never beyond `dist_max` (px).
    pub label_radius: f64,
    /// Ellipse hypotheses with a semi-major axis above this fraction of the
    /// image diagonal are rejected (slightly bent straight lines fit huge ellipses).
    pub ellipse_max_axis: f64,
    /// Ellipse hypotheses flatter than this minor/major axis ratio are rejected.
    pub ellipse_min_ratio: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            rmse_line: 2.0,
            rmse_merge: 4.0,
            min_region: 50,
            gap_radius: 1,
            spur_length: 6,
            dist_max: 4.0,
            merge_window: 0.25,
            ellipse_slack: 1.0,
            ellipse_margin: 0.0,
            label_radius: 2.0,
            ellipse_max_axis: 1.0,
            ellipse_min_ratio: 0.12,
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.rmse_line, "rmse_line")?;
        positive(self.rmse_merge, "rmse_merge")?;
        positive(self.dist_max, "dist_max")?;
        positive(self.merge_window, "merge_window")?;
        positive(self.label_radius, "label_radius")?;
        positive(self.ellipse_max_axis, "ellipse_max_axis")?;
        if !(0.0..=1.0).contains(&self.ellipse_min_ratio) {
            return Err(Error::Config(format!("ellipse_min_ratio must be in [0, 1], got {}", self.ellipse_min_ratio)));
        }
        if !(self.ellipse_slack >= 0.0 && self.ellipse_margin >= 0.0) {
            return Err(Error::Config("ellipse slack and margin must be >= 0".into()));
        }
        if self.min_region == 0 {
            return Err(Error::Config("min_region must be >= 1".into()));
        }
        Ok(())
    }
}

/// Final label of an image pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PixelLabel {
    /// Not part of the input mask.
    Background,
    Discarded,
    Line,
    Ellipse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinePrimitive {
    pub line: StraightLine,
    /// Ids of the supporting regions.
    pub support: Vec<usize>,
    /// Supporting skeleton pixels `(row, col)`.
    pub pixels: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipsePrimitive {
    pub ellipse: Ellipse,
    pub support: Vec<usize>,
    pub pixels: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Split,
    Initial,
    MergeLines,
    MergeEllipses,
    Refine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Replaced by the listed subregions.
    Split { into: Vec<usize> },
    /// Below the minimum size.
    Unassigned,
    AssignedLine,
    AssignedEllipse,
    /// Joined the line primitive now supported by `with`.
    MergedLine { with: Vec<usize> },
    /// Joined the ellipse primitive now supported by `with`.
    MergedEllipse { with: Vec<usize> },
    /// Support pixels farther than the pruning distance were discarded.
    Pruned { pixels: usize },
    /// Its primitive fell below the minimum size.
    Dropped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub region: usize,
    pub stage: Stage,
    pub action: Action,
}

/// Regions, primitives and per-pixel labels after any classification step.
#[derive(Clone, Debug)]
pub struct ClassificationResult {
    mask: BinaryMask,
    /// Working regions (after splitting), sorted by id.
    pub regions: Vec<Region>,
    pub lines: Vec<LinePrimitive>,
    pub ellipses: Vec<EllipsePrimitive>,
    pub audit: Vec<AuditEntry>,
    labels: Vec<PixelLabel>,
}

impl ClassificationResult {
    pub fn dims(&self) -> (usize, usize) {
        self.mask.dims()
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    /// Row-major per-pixel labels.
    pub fn labels(&self) -> &[PixelLabel] {
        &self.labels
    }

    pub fn label(&self, row: usize, col: usize) -> PixelLabel {
        self.labels[row * self.mask.width() + col]
    }

    pub fn count(&self, label: PixelLabel) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }

    pub fn region(&self, id: usize) -> Option<&Region> {
        self.regions
            .binary_search_by_key(&id, |r| r.id)
            .ok()
            .map(|i| &self.regions[i])
    }

    /// Mask of the pixels labeled `label`.
    pub fn label_mask(&self, label: PixelLabel) -> BinaryMask {
        let (h, w) = self.dims();
        BinaryMask::from_fn(h, w, |r, c| self.labels[r * w + c] == label)
    }

    /// Label raster: 0 background or discarded, 1 line, 2 ellipse.
    pub fn label_codes(&self) -> Vec<u8> {
        self.labels
            .iter()
            .map(|l| match l {
                PixelLabel::Line => 1,
                PixelLabel::Ellipse => 2,
                _ => 0,
            })
            .collect()
    }

    pub fn save_label_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let (h, w) = self.dims();
        io::save_labels(h, w, &self.label_codes(), path)
    }

    pub fn document(&self) -> PrimitivesDocument {
        let (h, w) = self.dims();
        PrimitivesDocument {
            version: PrimitivesDocument::VERSION,
            height: h,
            width: w,
            lines: self
                .lines
                .iter()
                .map(|p| {
                    let pts = regions::to_points(&p.pixels);
                    let ends = p.line.endpoints(&pts).unwrap_or([(0.0, 0.0); 2]);
                    LineRecord {
                        normal: p.line.normal,
                        offset: p.line.offset,
                        endpoints: [[ends[0].0, ends[0].1], [ends[1].0, ends[1].1]],
                        rmse: p.line.rmse,
                        pixel_count: p.pixels.len(),
                        support: p.support.clone(),
                    }
                })
                .collect(),
            ellipses: self
                .ellipses
                .iter()
                .map(|p| EllipseRecord {
                    center: p.ellipse.center,
                    axes: p.ellipse.axes,
                    theta: p.ellipse.theta,
                    conic: p.ellipse.conic,
                    rmse: p.ellipse.rmse,
                    pixel_count: p.pixels.len(),
                    support: p.support.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.document())
            .map_err(|e| Error::invalid(format!("serializing primitives: {e}")))
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Serialized form of a classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitivesDocument {
    pub version: u32,
    pub height: usize,
    pub width: usize,
    pub lines: Vec<LineRecord>,
    pub ellipses: Vec<EllipseRecord>,
}

impl PrimitivesDocument {
    pub const VERSION: u32 = 1;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineRecord {
    pub normal: [f64; 2],
    pub offset: f64,
    /// Extremes of the support projected on the line, `(row, col)`.
    pub endpoints: [[f64; 2]; 2],
    pub rmse: f64,
    pub pixel_count: usize,
    pub support: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseRecord {
    /// `(x0, y0) = (col, row)`.
    pub center: [f64; 2],
    pub axes: [f64; 2],
    pub theta: f64,
    pub conic: [f64; 6],
    pub rmse: f64,
    pub pixel_count: usize,
    pub support: Vec<usize>,
}
