//! Flat-disk grayscale morphology and the Top-Hat based line enhancement.
//!
//! Borders are handled by replicating edge pixels, so a flat image stays flat
//! under erosion and dilation and the Top-Hat does not light up image rims.

use rayon::prelude::*;

use super::{RasterImage, StructuringElement};
use crate::error::Result;

#[derive(Clone, Copy)]
enum Extremum {
    Min,
    Max,
}

/// Copy of `img` padded by `pad` pixels on every side with replicated edges.
fn pad_replicate(img: &RasterImage, pad: usize) -> (Vec<f64>, usize) {
    let (h, w) = img.dims();
    let pw = w + 2 * pad;
    let ph = h + 2 * pad;
    let src = img.samples();
    let mut out = vec![0.0; pw * ph];
    for pr in 0..ph {
        let r = pr.saturating_sub(pad).min(h - 1);
        let row = &src[r * w..(r + 1) * w];
        let dst = &mut out[pr * pw..(pr + 1) * pw];
        dst[..pad].fill(row[0]);
        dst[pad..pad + w].copy_from_slice(row);
        dst[pad + w..].fill(row[w - 1]);
    }
    (out, pw)
}

impl Extremum {
    fn identity(self) -> f64 {
        match self {
            Extremum::Min => f64::INFINITY,
            Extremum::Max => f64::NEG_INFINITY,
        }
    }

    #[inline]
    fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Extremum::Min => a.min(b),
            Extremum::Max => a.max(b),
        }
    }
}

/// Sliding extremum over windows of `len` samples of every row (van Herk /
/// Gil-Werman): entry `s` covers `row[s..s + len]`; entries whose window
/// would leave the row are unused.
fn sliding_rows(padded: &[f64], pw: usize, len: usize, which: Extremum) -> Vec<f64> {
    let mut out = vec![which.identity(); padded.len()];
    out.par_chunks_mut(pw).zip(padded.par_chunks(pw)).for_each(|(dst, row)| {
        let n = row.len();
        let mut prefix = vec![0.0; n];
        let mut suffix = vec![0.0; n];
        for block in (0..n).step_by(len) {
            let end = (block + len).min(n);
            let mut acc = which.identity();
            for i in block..end {
                acc = which.pick(acc, row[i]);
                prefix[i] = acc;
            }
            let mut acc = which.identity();
            for i in (block..end).rev() {
                acc = which.pick(acc, row[i]);
                suffix[i] = acc;
            }
        }
        for s in 0..=n.saturating_sub(len) {
            dst[s] = which.pick(suffix[s], prefix[s + len - 1]);
        }
    });
    out
}

fn rank_filter(img: &RasterImage, se: &StructuringElement, which: Extremum) -> RasterImage {
    let (h, w) = img.dims();
    let pad = se.radius();
    let (padded, pw) = pad_replicate(img, pad);
    // Footprint as (row offset, first column offset, length) runs.
    let mut runs: Vec<(isize, isize, usize)> = Vec::new();
    for &(dr, dc) in se.offsets() {
        match runs.last_mut() {
            Some((r, lo, len)) if *r == dr && *lo + *len as isize == dc => *len += 1,
            _ => runs.push((dr, dc, 1)),
        }
    }
    let mut lengths: Vec<usize> = runs.iter().map(|r| r.2).collect();
    lengths.sort_unstable();
    lengths.dedup();
    let tables: Vec<Vec<f64>> = lengths.iter().map(|&len| sliding_rows(&padded, pw, len, which)).collect();
    let runs: Vec<(isize, isize, &[f64])> = runs
        .iter()
        .map(|&(dr, lo, len)| (dr, lo, tables[lengths.binary_search(&len).expect("length listed")].as_slice()))
        .collect();
    let mut out = vec![0.0; h * w];
    out.par_chunks_mut(w).enumerate().for_each(|(r, out_row)| {
        for (c, o) in out_row.iter_mut().enumerate() {
            let mut acc = which.identity();
            for &(dr, lo, table) in &runs {
                let pr = (r as isize + pad as isize + dr) as usize;
                acc = which.pick(acc, table[pr * pw + (c as isize + pad as isize + lo) as usize]);
            }
            *o = acc;
        }
    });
    RasterImage::from_gray_unchecked(h, w, out)
}

/// Grayscale erosion (minimum over the footprint).
pub fn erode(img: &RasterImage, se: &StructuringElement) -> Result<RasterImage> {
    img.require_channels(1)?;
    Ok(rank_filter(img, se, Extremum::Min))
}

/// Grayscale dilation (maximum over the reflected footprint; the disk is symmetric).
pub fn dilate(img: &RasterImage, se: &StructuringElement) -> Result<RasterImage> {
    img.require_channels(1)?;
    Ok(rank_filter(img, se, Extremum::Max))
}

/// Erosion followed by dilation.
pub fn morphological_open(img: &RasterImage, se: &StructuringElement) -> Result<RasterImage> {
    img.require_channels(1)?;
    let eroded = rank_filter(img, se, Extremum::Min);
    Ok(rank_filter(&eroded, se, Extremum::Max))
}

/// White Top-Hat: `img - open(img)`. Keeps bright features narrower than `se`.
pub fn top_hat(img: &RasterImage, se: &StructuringElement) -> Result<RasterImage> {
    let opened = morphological_open(img, se)?;
    let samples = img
        .samples()
        .iter()
        .zip(opened.samples())
        .map(|(x, o)| (x - o).max(0.0))
        .collect();
    Ok(RasterImage::from_gray_unchecked(
        img.height(),
        img.width(),
        samples,
    ))
}

/// Per-pixel minimum of the R, G and B Top-Hats. Features that are not bright
/// in every channel (i.e. not white) vanish.
pub fn enhance_lines(rgb: &RasterImage, se: &StructuringElement) -> Result<RasterImage> {
    rgb.require_channels(3)?;
    let hats = (0..3)
        .map(|k| top_hat(&rgb.plane(k)?, se))
        .collect::<Result<Vec<_>>>()?;
    let samples = (0..rgb.height() * rgb.width())
        .map(|i| {
            hats[0].samples()[i]
                .min(hats[1].samples()[i])
                .min(hats[2].samples()[i])
        })
        .collect();
    Ok(RasterImage::from_gray_unchecked(
        rgb.height(),
        rgb.width(),
        samples,
    ))
}
