use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{enhance_lines, top_hat, BinaryMask, RasterImage, StructuringElement};

/// Per-pixel detector response in `[0, 1]`; a pixel is detected at threshold
/// `t` when its strength is strictly above `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeStrength {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl EdgeStrength {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                actual: (values.len(), 1),
            });
        }
        Ok(Self { height, width, values })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn threshold(&self, t: f64) -> BinaryMask {
        BinaryMask::from_fn(self.height, self.width, |r, c| self.get(r, c) > t)
    }

    pub fn sweep(&self, thresholds: &[f64]) -> ThresholdSweep {
        ThresholdSweep {
            thresholds: thresholds.to_vec(),
            masks: thresholds.iter().map(|&t| self.threshold(t)).collect(),
        }
    }
}

/// Masks of one detector over a list of normalized thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSweep {
    pub thresholds: Vec<f64>,
    pub masks: Vec<BinaryMask>,
}

/// `n` evenly spaced thresholds covering `[0, 1)`.
pub fn uniform_thresholds(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMethod {
    Sobel,
    Log,
    TopHat,
}

impl EdgeMethod {
    pub const ALL: [EdgeMethod; 3] = [EdgeMethod::Sobel, EdgeMethod::Log, EdgeMethod::TopHat];

    pub fn name(self) -> &'static str {
        match self {
            EdgeMethod::Sobel => "sobel",
            EdgeMethod::Log => "log",
            EdgeMethod::TopHat => "tophat",
        }
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::invalid(format!("threshold must be in [0,1], got {t}")))
    }
}

fn gray_input(img: &RasterImage) -> Result<&RasterImage> {
    img.require_channels(1)?;
    Ok(img)
}

/// Correlation with a 1-D kernel along rows (`horizontal`) or columns,
/// replicating border samples.
fn correlate_1d(src: &[f64], h: usize, w: usize, kernel: &[f64], horizontal: bool) -> Vec<f64> {
    let half = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let off = k as isize - half;
                let (rr, cc) = if horizontal {
                    (r as isize, (c as isize + off).clamp(0, w as isize - 1))
                } else {
                    ((r as isize + off).clamp(0, h as isize - 1), c as isize)
                };
                acc += kv * src[rr as usize * w + cc as usize];
            }
            out[r * w + c] = acc;
        }
    }
    out
}

/// Separable correlation: `col_kernel` down columns after `row_kernel` along rows.
fn correlate_separable(src: &[f64], h: usize, w: usize, row_kernel: &[f64], col_kernel: &[f64]) -> Vec<f64> {
    let tmp = correlate_1d(src, h, w, row_kernel, true);
    correlate_1d(&tmp, h, w, col_kernel, false)
}

/// Largest Sobel gradient magnitude over all images with samples in `[0, 1]`
/// (attained on binary neighborhoods, since each component is linear).
pub fn sobel_max() -> f64 {
    let mut best = 0.0f64;
    for bits in 0u32..512 {
        let p = |i: u32| ((bits >> i) & 1) as f64;
        let gx = (p(2) + 2.0 * p(5) + p(8)) - (p(0) + 2.0 * p(3) + p(6));
        let gy = (p(6) + 2.0 * p(7) + p(8)) - (p(0) + 2.0 * p(1) + p(2));
        best = best.max(gx.hypot(gy));
    }
    best
}

/// Normalized Sobel gradient magnitude.
pub fn sobel_strength(gray: &RasterImage) -> Result<EdgeStrength> {
    let gray = gray_input(gray)?;
    let (h, w) = gray.dims();
    let src = gray.samples();
    let gx = correlate_separable(src, h, w, &[-1.0, 0.0, 1.0], &[1.0, 2.0, 1.0]);
    let gy = correlate_separable(src, h, w, &[1.0, 2.0, 1.0], &[-1.0, 0.0, 1.0]);
    let norm = sobel_max();
    let values = gx
        .iter()
        .zip(&gy)
        .map(|(x, y)| (x.hypot(*y) / norm).min(1.0))
        .collect();
    EdgeStrength::new(h, w, values)
}

pub fn sobel_edges(gray: &RasterImage, threshold: f64) -> Result<BinaryMask> {
    check_threshold(threshold)?;
    Ok(sobel_strength(gray)?.threshold(threshold))
}

/// LoG scale matched to the 3-9 px stroke widths of broadcast frames.
pub const DEFAULT_LOG_SIGMA: f64 = 1.5;

/// 1-D Gaussian (unit sum) and its second derivative (zero sum) on
/// `[-ceil(3 sigma), ceil(3 sigma)]`.
pub fn log_kernels(sigma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    let half = (3.0 * sigma).ceil() as isize;
    let xs: Vec<f64> = (-half..=half).map(|x| x as f64).collect();
    let s2 = sigma * sigma;
    let mut g: Vec<f64> = xs.iter().map(|x| (-x * x / (2.0 * s2)).exp()).collect();
    let sum: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= sum);
    let mut d2: Vec<f64> = xs.iter().zip(&g).map(|(x, gv)| (x * x / s2 - 1.0) / s2 * gv).collect();
    let mean = d2.iter().sum::<f64>() / d2.len() as f64;
    d2.iter_mut().for_each(|v| *v -= mean);
    Ok((g, d2))
}

/// Laplacian-of-Gaussian response as the sum of two separable passes, scaled
/// by the kernel's largest possible response on `[0, 1]` inputs.
pub fn log_response(gray: &RasterImage, sigma: f64) -> Result<Vec<f64>> {
    let gray = gray_input(gray)?;
    let (g, d2) = log_kernels(sigma)?;
    let (h, w) = gray.dims();
    let src = gray.samples();
    let a = correlate_separable(src, h, w, &d2, &g);
    let b = correlate_separable(src, h, w, &g, &d2);
    // Zero-sum kernel: the extreme response is half its absolute mass.
    let norm = log_kernel_2d(&g, &d2).iter().map(|v| v.abs()).sum::<f64>() / 2.0;
    Ok(a.iter().zip(&b).map(|(x, y)| (x + y) / norm).collect())
}

/// Dense 2-D kernel `d2(x) g(y) + g(x) d2(y)`, row-major, rows indexed by `y`.
pub fn log_kernel_2d(g: &[f64], d2: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut k = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            k[y * n + x] = d2[x] * g[y] + g[x] * d2[y];
        }
    }
    k
}

/// Responses within this distance of zero carry no sign (rounding noise on
/// flat areas would otherwise create crossings).
const ZERO: f64 = 1e-12;

/// Zero crossings of the LoG response; the strength of a pixel is the largest
/// response jump to a 4-neighbor of opposite sign, kept on the side closer
/// to zero (both sides on exact ties).
pub fn log_strength(gray: &RasterImage, sigma: f64) -> Result<EdgeStrength> {
    let (h, w) = gray.dims();
    let resp = log_response(gray, sigma)?;
    let mut values = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            let v = resp[r * w + c];
            let mut best = 0.0f64;
            for (dr, dc) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let q = resp[nr as usize * w + nc as usize];
                let opposite = (v > ZERO && q < -ZERO) || (v < -ZERO && q > ZERO);
                if opposite && v.abs() <= q.abs() {
                    best = best.max((v - q).abs());
                }
            }
            values[r * w + c] = best.min(1.0);
        }
    }
    EdgeStrength::new(h, w, values)
}

pub fn log_edges(gray: &RasterImage, sigma: f64, threshold: f64) -> Result<BinaryMask> {
    check_threshold(threshold)?;
    Ok(log_strength(gray, sigma)?.threshold(threshold))
}

/// Top-Hat response; color images use the channel minimum of per-channel Top-Hats.
pub fn tophat_strength(img: &RasterImage, se: &StructuringElement) -> Result<EdgeStrength> {
    let th = match img.channels() {
        1 => top_hat(img, se)?,
        _ => enhance_lines(img, se)?,
    };
    let (h, w) = th.dims();
    EdgeStrength::new(h, w, th.into_samples().into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

pub fn tophat_threshold(img: &RasterImage, se: &StructuringElement, threshold: f64) -> Result<BinaryMask> {
    check_threshold(threshold)?;
    Ok(tophat_strength(img, se)?.threshold(threshold))
}

/// Strength of any edge method with default parameters.
pub fn edge_strength(method: EdgeMethod, img: &RasterImage, se: &StructuringElement, sigma: f64) -> Result<EdgeStrength> {
    let gray_of = |img: &RasterImage| -> Result<RasterImage> {
        if img.channels() == 1 {
            return Ok(img.clone());
        }
        let (h, w) = img.dims();
        RasterImage::from_fn_gray(h, w, |r, c| {
            0.299 * img.get(r, c, 0) + 0.587 * img.get(r, c, 1) + 0.114 * img.get(r, c, 2)
        })
    };
    match method {
        EdgeMethod::Sobel => sobel_strength(&gray_of(img)?),
        EdgeMethod::Log => log_strength(&gray_of(img)?, sigma),
        EdgeMethod::TopHat => tophat_strength(img, se),
    }
}
