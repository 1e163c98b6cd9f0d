//! Pixel- and object-level scoring, dataset input/output and experiment
//! orchestration (full pipeline runs and baseline sweeps).

mod dataset;
mod experiment;
mod metrics;

pub use dataset::{
    item_paths, load_dataset, load_item, write_dataset, AnnotatedPrimitive, AnnotationFile, Dataset, DatasetItem,
    GtPrimitive, ItemMetadata, LoadError, PrimitiveKind,
};
pub use experiment::{
    classified_pixel_metrics, edge_sweep, evaluate_item, hough_csv, hough_predictions, hough_sweep, match_rule, par_map,
    retained_pixel_metrics, run_experiment, sweep_csv, Aggregate, ExperimentReport, HoughRow, ItemFailure, ItemReport, SweepRow,
};
pub use metrics::{
    object_metrics, pixel_metrics, predicted_primitives, squared_distance_transform, ClassCounts, MatchRule,
    ObjectMetrics, PixelMetrics, PredictedPrimitive,
};
