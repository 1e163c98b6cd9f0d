use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{object_metrics, pixel_metrics, predicted_primitives, MatchRule, ObjectMetrics, PixelMetrics, PredictedPrimitive};
use super::{DatasetItem, PrimitiveKind};
use crate::baselines::{edge_strength, hough_lines, EdgeMethod, HoughLine};
use crate::classify::PixelLabel;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::imaging::BinaryMask;
use crate::pipeline::{detect, segment, Detection};

/// Metric groups of one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub match_name: String,
    pub image_name: String,
    /// Line mask against the ground-truth line pixels.
    pub segmentation: PixelMetrics,
    /// Pixels kept as line or ellipse, regardless of class, against all
    /// ground-truth line pixels.
    pub retained: PixelMetrics,
    /// Line- and ellipse-labeled pixels against ground-truth pixels of the same class.
    pub classification_px: PixelMetrics,
    pub classification_obj: ObjectMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemFailure {
    pub item: String,
    pub message: String,
}

/// Micro-averaged metric groups.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub images: usize,
    pub segmentation: PixelMetrics,
    pub retained: PixelMetrics,
    pub classification_px: PixelMetrics,
    pub classification_obj: ObjectMetrics,
}

impl Aggregate {
    fn of<'a>(items: impl IntoIterator<Item = &'a ItemReport> + Clone) -> Self {
        Self {
            images: items.clone().into_iter().count(),
            segmentation: PixelMetrics::sum(items.clone().into_iter().map(|i| &i.segmentation)),
            retained: PixelMetrics::sum(items.clone().into_iter().map(|i| &i.retained)),
            classification_px: PixelMetrics::sum(items.clone().into_iter().map(|i| &i.classification_px)),
            classification_obj: ObjectMetrics::sum(items.into_iter().map(|i| &i.classification_obj)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tol_px: f64,
    pub config: RunConfig,
    pub overall: Aggregate,
    pub per_match: BTreeMap<String, Aggregate>,
    pub items: Vec<ItemReport>,
    pub failures: Vec<ItemFailure>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))
    }

    /// One row per image and metric group. Object rows store detected,
    /// false and missed primitives in the tp, fp and fn columns.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        w.write_record([
            "match", "image", "group", "tp", "fp", "fn", "rec", "pre", "f", "line_detected", "line_misdetected",
            "line_false", "ellipse_detected", "ellipse_misdetected", "ellipse_false",
        ])
        .map_err(err)?;
        for it in &self.items {
            for (group, m) in [("segmentation", it.segmentation), ("retained", it.retained), ("classification_px", it.classification_px)] {
                let mut row = vec![it.match_name.clone(), it.image_name.clone(), group.to_string()];
                row.extend([m.tp.to_string(), m.fp.to_string(), m.fn_.to_string()]);
                row.extend([m.rec, m.pre, m.f].map(|v| format!("{v:.6}")));
                row.extend(std::iter::repeat_n(String::new(), 6));
                w.write_record(&row).map_err(err)?;
            }
            let o = &it.classification_obj;
            let t = o.total();
            let mut row = vec![it.match_name.clone(), it.image_name.clone(), "classification_obj".to_string()];
            row.extend([t.detected, t.false_detections, t.misdetected].map(|v| v.to_string()));
            row.extend([t.rec(), t.pre(), t.f()].map(|v| format!("{v:.6}")));
            for c in [o.lines, o.ellipses] {
                row.extend([c.detected, c.misdetected, c.false_detections].map(|v| v.to_string()));
            }
            w.write_record(&row).map_err(err)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::invalid(e.to_string()))?).map_err(|e| Error::invalid(e.to_string()))
    }

    /// Writes `report.csv` and `report.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in [("report.csv", self.to_csv()?), ("report.json", self.to_json()? + "\n")] {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

/// Object matching rule implied by a run configuration.
pub fn match_rule(cfg: &RunConfig) -> MatchRule {
    MatchRule { tol_px: cfg.tol_px, min_coverage: 0.5, min_gt_pixels: cfg.classify.min_region }
}

/// Class-aware pixel counts: labeled line pixels against ground-truth line
/// pixels plus labeled ellipse pixels against ground-truth ellipse pixels.
pub fn classified_pixel_metrics(item: &DatasetItem, det: &Detection, tol_px: f64) -> Result<PixelMetrics> {
    let parts = [(PixelLabel::Line, PrimitiveKind::Line), (PixelLabel::Ellipse, PrimitiveKind::Ellipse)]
        .iter()
        .map(|&(label, kind)| pixel_metrics(&det.classification.label_mask(label), &item.class_mask(kind), tol_px))
        .collect::<Result<Vec<_>>>()?;
    Ok(PixelMetrics::sum(&parts))
}

/// Pixels labeled line or ellipse against all ground-truth line pixels.
pub fn retained_pixel_metrics(item: &DatasetItem, det: &Detection, tol_px: f64) -> Result<PixelMetrics> {
    let c = &det.classification;
    let (h, w) = c.dims();
    let kept = BinaryMask::from_fn(h, w, |r, col| matches!(c.label(r, col), PixelLabel::Line | PixelLabel::Ellipse));
    pixel_metrics(&kept, &item.lines, tol_px)
}

pub fn evaluate_item(item: &DatasetItem, det: &Detection, cfg: &RunConfig) -> Result<ItemReport> {
    Ok(ItemReport {
        match_name: item.match_name.clone(),
        image_name: item.image_name.clone(),
        segmentation: pixel_metrics(&det.mask, &item.lines, cfg.tol_px)?,
        retained: retained_pixel_metrics(item, det, cfg.tol_px)?,
        classification_px: classified_pixel_metrics(item, det, cfg.tol_px)?,
        classification_obj: object_metrics(item.dims(), &predicted_primitives(&det.classification), &item.primitives, &match_rule(cfg))?,
    })
}

/// Runs `f` over the items on `jobs` worker threads (0 = all cores),
/// returning results in item order.
pub fn par_map<T: Send>(items: &[DatasetItem], jobs: usize, f: impl Fn(&DatasetItem) -> T + Sync + Send) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

/// Detection and scoring of every item. Per-item failures are recorded and
/// aggregation covers the successful items only.
pub fn run_experiment(items: &[DatasetItem], cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let results = par_map(items, cfg.jobs, |item| {
        let det = detect(&item.image, &item.field, cfg)?;
        evaluate_item(item, &det, cfg)
    })?;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (item, r) in items.iter().zip(results) {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => failures.push(ItemFailure { item: item.id(), message: e.to_string() }),
        }
    }
    let mut per_match = BTreeMap::new();
    let names: std::collections::BTreeSet<_> = reports.iter().map(|r| r.match_name.clone()).collect();
    for name in names {
        per_match.insert(name.clone(), Aggregate::of(reports.iter().filter(|r| r.match_name == name)));
    }
    Ok(ExperimentReport {
        tol_px: cfg.tol_px,
        config: cfg.clone(),
        overall: Aggregate::of(reports.iter()),
        per_match,
        items: reports,
        failures,
    })
}

/// One point of a baseline threshold sweep, micro-averaged over the dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub threshold: f64,
    pub metrics: PixelMetrics,
}

/// Pixel metrics of a thresholded edge map (restricted to the field) for
/// every threshold; `sigma` is the LoG scale.
pub fn edge_sweep(items: &[DatasetItem], method: EdgeMethod, thresholds: &[f64], sigma: f64, cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let se = cfg.structuring_element()?;
    let per_item = par_map(items, cfg.jobs, |item| -> Result<Vec<PixelMetrics>> {
        let strength = edge_strength(method, &item.image, &se, sigma)?;
        let sweep = strength.sweep(thresholds);
        sweep.masks.iter().map(|m| pixel_metrics(&m.and(&item.field)?, &item.lines, cfg.tol_px)).collect()
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(thresholds
        .iter()
        .enumerate()
        .map(|(k, &t)| SweepRow {
            method: method.name().to_string(),
            threshold: t,
            metrics: PixelMetrics::sum(per_item.iter().map(|v| &v[k])),
        })
        .collect())
}

/// Hough detections as primitives: each line is supported by the mask
/// pixels within `tol_px` of it.
pub fn hough_predictions(mask: &BinaryMask, lines: &[HoughLine], tol_px: f64) -> Vec<PredictedPrimitive> {
    lines
        .iter()
        .map(|l| PredictedPrimitive {
            kind: PrimitiveKind::Line,
            pixels: mask.pixels().filter(|&(r, c)| l.distance(r as f64, c as f64) <= tol_px).collect(),
        })
        .collect()
}

/// Object metrics of Hough detection with `n` lines on the segmented line
/// mask, for every `n` in `counts`. Only straight-line ground truth is scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoughRow {
    pub n_lines: usize,
    pub lines: super::ClassCounts,
}

pub fn hough_sweep(items: &[DatasetItem], counts: &[usize], cfg: &RunConfig) -> Result<Vec<HoughRow>> {
    cfg.validate()?;
    let rule = match_rule(cfg);
    let per_item = par_map(items, cfg.jobs, |item| -> Result<Vec<ObjectMetrics>> {
        let (_, _, mask) = segment(&item.image, &item.field, cfg)?;
        let gt: Vec<_> = item.primitives.iter().filter(|p| p.kind == PrimitiveKind::Line).cloned().collect();
        counts
            .iter()
            .map(|&n| object_metrics(item.dims(), &hough_predictions(&mask, &hough_lines(&mask, n)?, cfg.tol_px), &gt, &rule))
            .collect()
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &n)| HoughRow { n_lines: n, lines: ObjectMetrics::sum(per_item.iter().map(|v| &v[k])).lines })
        .collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    w.write_record(["method", "threshold", "rec", "pre", "f"]).map_err(err)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            format!("{:.6}", r.threshold),
            format!("{:.6}", r.metrics.rec),
            format!("{:.6}", r.metrics.pre),
            format!("{:.6}", r.metrics.f),
        ])
        .map_err(err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::invalid(e.to_string()))?).map_err(|e| Error::invalid(e.to_string()))
}

pub fn hough_csv(rows: &[HoughRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    w.write_record(["method", "n_lines", "detected", "misdetected", "false", "rec", "pre", "f"]).map_err(err)?;
    for r in rows {
        let c = &r.lines;
        w.write_record([
            "hough".to_string(),
            r.n_lines.to_string(),
            c.detected.to_string(),
            c.misdetected.to_string(),
            c.false_detections.to_string(),
            format!("{:.6}", c.rec()),
            format!("{:.6}", c.pre()),
            format!("{:.6}", c.f()),
        ])
        .map_err(err)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::invalid(e.to_string()))?).map_err(|e| Error::invalid(e.to_string()))
}
