use serde::{Deserialize, Serialize};

use crate::classify::StraightLine;
use crate::error::{Error, Result};
use crate::imaging::BinaryMask;

const THETA_BINS: usize = 180;

/// Line `x cos(theta) + y sin(theta) = rho` with `x = col`, `y = row`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoughLine {
    /// In `[0, pi)`.
    pub theta: f64,
    /// Signed distance from the origin (px).
    pub rho: f64,
    pub votes: u32,
}

impl HoughLine {
    pub fn to_line(&self) -> StraightLine {
        StraightLine::from_normal_offset([self.theta.sin(), self.theta.cos()], self.rho)
    }

    pub fn distance(&self, row: f64, col: f64) -> f64 {
        (col * self.theta.cos() + row * self.theta.sin() - self.rho).abs()
    }
}

/// Vote accumulator over 1° x 1 px bins.
#[derive(Clone, Debug, PartialEq)]
pub struct HoughAccumulator {
    rho_max: isize,
    votes: Vec<u32>,
}

impl HoughAccumulator {
    pub fn rho_bins(&self) -> usize {
        (2 * self.rho_max + 1) as usize
    }

    pub fn votes(&self, theta_bin: usize, rho: isize) -> u32 {
        self.votes[theta_bin * self.rho_bins() + (rho + self.rho_max) as usize]
    }

    /// Bin at `theta_bin + dt` (wrapping around pi, where rho changes sign).
    fn neighbor(&self, t: usize, rho: isize, dt: isize, dr: isize) -> Option<usize> {
        let mut nt = t as isize + dt;
        let mut nr = rho + dr;
        if nt < 0 || nt >= THETA_BINS as isize {
            nt = nt.rem_euclid(THETA_BINS as isize);
            nr = -(rho) + dr;
        }
        (nr.abs() <= self.rho_max).then(|| nt as usize * self.rho_bins() + (nr + self.rho_max) as usize)
    }
}

fn trig() -> Vec<(f64, f64)> {
    (0..THETA_BINS)
        .map(|k| (k as f64).to_radians().sin_cos())
        .map(|(s, c)| (c, s))
        .collect()
}

pub fn hough_accumulate(mask: &BinaryMask) -> HoughAccumulator {
    let (h, w) = mask.dims();
    hough_accumulate_points(h, w, mask.pixels())
}

/// Accumulator over an explicit pixel sequence `(row, col)` of an `h x w` image.
pub fn hough_accumulate_points(h: usize, w: usize, points: impl IntoIterator<Item = (usize, usize)>) -> HoughAccumulator {
    let rho_max = (h as f64).hypot(w as f64).ceil() as isize + 1;
    let bins = (2 * rho_max + 1) as usize;
    let mut votes = vec![0u32; THETA_BINS * bins];
    let table = trig();
    for (r, c) in points {
        for (t, &(cos, sin)) in table.iter().enumerate() {
            let rho = (c as f64 * cos + r as f64 * sin).round() as isize;
            votes[t * bins + (rho + rho_max) as usize] += 1;
        }
    }
    HoughAccumulator { rho_max, votes }
}

/// The `n_lines` strongest accumulator peaks that are maxima of their 5x5
/// neighborhood (ties resolved towards the lower bin index).
pub fn hough_lines(mask: &BinaryMask, n_lines: usize) -> Result<Vec<HoughLine>> {
    hough_peaks(&hough_accumulate(mask), n_lines)
}

pub fn hough_peaks(acc: &HoughAccumulator, n_lines: usize) -> Result<Vec<HoughLine>> {
    if n_lines == 0 {
        return Err(Error::invalid("n_lines must be >= 1"));
    }
    let bins = acc.rho_bins();
    let mut peaks = Vec::new();
    for t in 0..THETA_BINS {
        for ri in 0..bins {
            let idx = t * bins + ri;
            let v = acc.votes[idx];
            if v == 0 {
                continue;
            }
            let rho = ri as isize - acc.rho_max;
            let is_peak = (-2..=2).all(|dt| {
                (-2..=2).all(|dr| match acc.neighbor(t, rho, dt, dr) {
                    Some(n) if n != idx => acc.votes[n] < v || (acc.votes[n] == v && n > idx),
                    _ => true,
                })
            });
            if is_peak {
                peaks.push((v, idx));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(peaks
        .into_iter()
        .take(n_lines)
        .map(|(votes, idx)| HoughLine {
            theta: ((idx / bins) as f64).to_radians(),
            rho: (idx % bins) as f64 - acc.rho_max as f64,
            votes,
        })
        .collect())
}
