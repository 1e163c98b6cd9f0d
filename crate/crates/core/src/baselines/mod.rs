//! Reference detectors: Sobel, Laplacian of Gaussian and thresholded
//! Top-Hat edge maps, and Hough straight-line detection.

mod edges;
mod hough;

pub use edges::{
    edge_strength, log_edges, log_kernel_2d, log_kernels, log_response, log_strength, sobel_edges,
    sobel_max, sobel_strength, tophat_strength, tophat_threshold, uniform_thresholds, EdgeMethod,
    EdgeStrength, ThresholdSweep, DEFAULT_LOG_SIGMA,
};
pub use hough::{hough_accumulate, hough_accumulate_points, hough_lines, hough_peaks, HoughAccumulator, HoughLine};
