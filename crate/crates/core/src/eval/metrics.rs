use serde::{Deserialize, Serialize};

use super::{GtPrimitive, PrimitiveKind};
use crate::classify::ClassificationResult;
use crate::error::{Error, Result};
use crate::imaging::BinaryMask;

/// `a / b`, with the empty case `0 / 0` defined as a perfect score.
fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

/// Exact squared Euclidean distance from every pixel to the nearest set pixel
/// of `mask` (separable lower-envelope transform). Pixels of an empty mask
/// get `f64::INFINITY`.
pub fn squared_distance_transform(mask: &BinaryMask) -> Vec<f64> {
    let (h, w) = mask.dims();
    let mut d: Vec<f64> = mask.bits().iter().map(|b| if *b { 0.0 } else { f64::INFINITY }).collect();
    let mut buf = vec![0.0; h.max(w)];
    let mut out = vec![0.0; h.max(w)];
    for c in 0..w {
        for r in 0..h {
            buf[r] = d[r * w + c];
        }
        envelope(&buf[..h], &mut out[..h]);
        for r in 0..h {
            d[r * w + c] = out[r];
        }
    }
    for r in 0..h {
        buf[..w].copy_from_slice(&d[r * w..(r + 1) * w]);
        envelope(&buf[..w], &mut out[..w]);
        d[r * w..(r + 1) * w].copy_from_slice(&out[..w]);
    }
    d
}

/// 1-D squared distance transform of sampled function `f` (Felzenszwalb–Huttenlocher).
fn envelope(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&i| f[i].is_finite()).collect();
    if sites.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut v: Vec<usize> = Vec::with_capacity(sites.len());
    let mut z: Vec<f64> = Vec::with_capacity(sites.len() + 1);
    let meet = |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for &q in &sites {
        while let Some(&p) = v.last() {
            if meet(q, p) <= z[z.len() - 1] {
                v.pop();
                z.pop();
            } else {
                break;
            }
        }
        if v.is_empty() {
            z.push(f64::NEG_INFINITY);
        } else {
            z.push(meet(q, *v.last().unwrap()));
        }
        v.push(q);
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (x, o) in out.iter_mut().enumerate() {
        while z[k + 1] < x as f64 {
            k += 1;
        }
        let p = v[k];
        let dx = x as f64 - p as f64;
        *o = dx * dx + f[p];
    }
}

/// Pixel-level detection counts and derived scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PixelMetrics {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub rec: f64,
    pub pre: f64,
    pub f: f64,
}

impl PixelMetrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        Self {
            tp,
            fp,
            fn_,
            rec: ratio(tp, tp + fn_),
            pre: ratio(tp, tp + fp),
            f: ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }

    /// Micro-average: scores of the summed counts.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a PixelMetrics>) -> Self {
        let (tp, fp, fn_) = items.into_iter().fold((0, 0, 0), |a, m| (a.0 + m.tp, a.1 + m.fp, a.2 + m.fn_));
        Self::from_counts(tp, fp, fn_)
    }
}

/// Predicted pixels within `tol_px` of a ground-truth pixel are true
/// positives, the other predicted pixels false positives; ground-truth pixels
/// with no prediction within `tol_px` are false negatives.
pub fn pixel_metrics(pred: &BinaryMask, gt: &BinaryMask, tol_px: f64) -> Result<PixelMetrics> {
    if pred.dims() != gt.dims() {
        return Err(Error::DimensionMismatch { expected: gt.dims(), actual: pred.dims() });
    }
    if !(tol_px >= 0.0) {
        return Err(Error::invalid(format!("tolerance must be >= 0, got {tol_px}")));
    }
    let t2 = tol_px * tol_px;
    let to_gt = squared_distance_transform(gt);
    let to_pred = squared_distance_transform(pred);
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for i in 0..pred.bits().len() {
        if pred.bits()[i] {
            if to_gt[i] <= t2 {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        if gt.bits()[i] && to_pred[i] > t2 {
            fn_ += 1;
        }
    }
    Ok(PixelMetrics::from_counts(tp, fp, fn_))
}

/// A predicted primitive for object-level scoring.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictedPrimitive {
    pub kind: PrimitiveKind,
    pub pixels: Vec<(usize, usize)>,
}

/// Supports of the line and ellipse primitives of a classification.
pub fn predicted_primitives(result: &ClassificationResult) -> Vec<PredictedPrimitive> {
    let lines = result.lines.iter().map(|l| PredictedPrimitive { kind: PrimitiveKind::Line, pixels: l.pixels.clone() });
    let ellipses = result.ellipses.iter().map(|e| PredictedPrimitive { kind: PrimitiveKind::Ellipse, pixels: e.pixels.clone() });
    lines.chain(ellipses).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub detected: u64,
    pub misdetected: u64,
    pub false_detections: u64,
}

impl ClassCounts {
    pub fn rec(&self) -> f64 {
        ratio(self.detected, self.detected + self.misdetected)
    }

    pub fn pre(&self) -> f64 {
        ratio(self.detected, self.detected + self.false_detections)
    }

    pub fn f(&self) -> f64 {
        ratio(2 * self.detected, 2 * self.detected + self.misdetected + self.false_detections)
    }

    fn add(&self, o: &ClassCounts) -> ClassCounts {
        ClassCounts {
            detected: self.detected + o.detected,
            misdetected: self.misdetected + o.misdetected,
            false_detections: self.false_detections + o.false_detections,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectMetrics {
    pub lines: ClassCounts,
    pub ellipses: ClassCounts,
}

impl ObjectMetrics {
    pub fn total(&self) -> ClassCounts {
        self.lines.add(&self.ellipses)
    }

    pub fn class(&self, kind: PrimitiveKind) -> &ClassCounts {
        match kind {
            PrimitiveKind::Line => &self.lines,
            PrimitiveKind::Ellipse => &self.ellipses,
        }
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a ObjectMetrics>) -> Self {
        items.into_iter().fold(Self::default(), |a, m| ObjectMetrics {
            lines: a.lines.add(&m.lines),
            ellipses: a.ellipses.add(&m.ellipses),
        })
    }
}

/// Object-matching parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRule {
    /// Ground-truth pixels count as covered within this distance of a prediction.
    pub tol_px: f64,
    /// Fraction of ground-truth pixels a prediction must cover.
    pub min_coverage: f64,
    /// Ground-truth primitives with fewer visible pixels are not scored.
    pub min_gt_pixels: usize,
}

impl Default for MatchRule {
    fn default() -> Self {
        Self { tol_px: 2.0, min_coverage: 0.5, min_gt_pixels: 1 }
    }
}

/// Greedy one-to-one matching of predictions to ground truth of the same
/// class by decreasing coverage (ties: lower ground-truth index, then lower
/// prediction index).
pub fn object_metrics(
    dims: (usize, usize),
    pred: &[PredictedPrimitive],
    gt: &[GtPrimitive],
    rule: &MatchRule,
) -> Result<ObjectMetrics> {
    let (h, w) = dims;
    let out_of_frame = |&(r, c): &(usize, usize)| r >= h || c >= w;
    if pred.iter().any(|p| p.pixels.iter().any(out_of_frame)) || gt.iter().any(|g| g.pixels.iter().any(out_of_frame)) {
        return Err(Error::invalid("primitive pixels outside the image frame"));
    }
    let scored: Vec<&GtPrimitive> = gt.iter().filter(|g| g.pixels.len() >= rule.min_gt_pixels.max(1)).collect();
    let t2 = rule.tol_px * rule.tol_px;
    let mut pairs = Vec::new();
    for (pi, p) in pred.iter().enumerate() {
        if p.pixels.is_empty() {
            continue;
        }
        let near = squared_distance_transform(&BinaryMask::from_pixels(h, w, &p.pixels));
        for (gi, g) in scored.iter().enumerate() {
            if g.kind != p.kind {
                continue;
            }
            let covered = g.pixels.iter().filter(|&&(r, c)| near[r * w + c] <= t2).count();
            let coverage = covered as f64 / g.pixels.len() as f64;
            if coverage >= rule.min_coverage {
                pairs.push((coverage, gi, pi));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_used = vec![false; scored.len()];
    let mut pred_used = vec![false; pred.len()];
    for (_, gi, pi) in pairs {
        if !gt_used[gi] && !pred_used[pi] {
            gt_used[gi] = true;
            pred_used[pi] = true;
        }
    }
    let mut m = ObjectMetrics::default();
    for (gi, g) in scored.iter().enumerate() {
        let c = if g.kind == PrimitiveKind::Line { &mut m.lines } else { &mut m.ellipses };
        if gt_used[gi] {
            c.detected += 1;
        } else {
            c.misdetected += 1;
        }
    }
    for (pi, p) in pred.iter().enumerate() {
        if !pred_used[pi] {
            let c = if p.kind == PrimitiveKind::Line { &mut m.lines } else { &mut m.ellipses };
            c.false_detections += 1;
        }
    }
    Ok(m)
}
