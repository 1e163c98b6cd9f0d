use crate::error::{Error, Result};

/// Row-major image with 1 or 3 interleaved channels, samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterImage {
    height: usize,
    width: usize,
    channels: usize,
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn new(height: usize, width: usize, channels: usize, samples: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("image dimensions must be at least 1x1"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "unsupported channel count {channels}"
            )));
        }
        if samples.len() != height * width * channels {
            return Err(Error::invalid(format!(
                "expected {} samples, got {}",
                height * width * channels,
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::invalid(format!("sample {bad} outside [0, 1]")));
        }
        Ok(Self {
            height,
            width,
            channels,
            samples,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    /// Builds a single-channel image from a closure over `(row, col)`.
    pub fn from_fn_gray(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                samples.push(f(r, c));
            }
        }
        Self::new(height, width, 1, samples)
    }

    pub(crate) fn from_gray_unchecked(height: usize, width: usize, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), height * width);
        Self {
            height,
            width,
            channels: 1,
            samples,
        }
    }

    /// Interleaves three equally sized gray planes into an RGB image.
    pub fn from_planes(r: &RasterImage, g: &RasterImage, b: &RasterImage) -> Result<Self> {
        for p in [r, g, b] {
            if p.channels != 1 {
                return Err(Error::invalid("planes must be single-channel"));
            }
            if p.dims() != r.dims() {
                return Err(Error::DimensionMismatch {
                    expected: r.dims(),
                    actual: p.dims(),
                });
            }
        }
        let mut samples = Vec::with_capacity(r.samples.len() * 3);
        for i in 0..r.samples.len() {
            samples.extend_from_slice(&[r.samples[i], g.samples[i], b.samples[i]]);
        }
        Ok(Self {
            height: r.height,
            width: r.width,
            channels: 3,
            samples,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(height, width)`
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.samples[(row * self.width + col) * self.channels + channel]
    }

    pub fn gray(&self, row: usize, col: usize) -> f64 {
        self.get(row, col, 0)
    }

    /// Extracts one channel as a gray image.
    pub fn plane(&self, channel: usize) -> Result<RasterImage> {
        if channel >= self.channels {
            return Err(Error::invalid(format!(
                "channel {channel} out of range for {}-channel image",
                self.channels
            )));
        }
        let samples = self
            .samples
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect();
        Ok(Self::from_gray_unchecked(self.height, self.width, samples))
    }

    pub(crate) fn require_channels(&self, channels: usize) -> Result<()> {
        if self.channels != channels {
            return Err(Error::invalid(format!(
                "expected {channels}-channel image, got {} channels",
                self.channels
            )));
        }
        Ok(())
    }
}

/// Per-pixel boolean grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn full(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![true; height * width],
        }
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::invalid(format!(
                "expected {} mask bits, got {}",
                height * width,
                bits.len()
            )));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                bits.push(f(r, c));
            }
        }
        Self {
            height,
            width,
            bits,
        }
    }

    /// Mask with exactly the listed `(row, col)` pixels set.
    pub fn from_pixels(height: usize, width: usize, pixels: &[(usize, usize)]) -> Self {
        let mut m = Self::new(height, width);
        for &(r, c) in pixels {
            m.set(r, c, true);
        }
        m
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    /// Bounds-checked lookup with signed coordinates; outside reads as `false`.
    pub fn get_signed(&self, row: isize, col: isize) -> bool {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            return false;
        }
        self.get(row as usize, col as usize)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Set pixels as `(row, col)` in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i / w, i % w))
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.require_dims(other.dims())?;
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| *a && *b)
            .collect();
        Ok(Self {
            height: self.height,
            width: self.width,
            bits,
        })
    }

    /// Whether every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    pub fn transpose(&self) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |r, c| self.get(c, r))
    }

    pub(crate) fn require_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: self.dims(),
            });
        }
        Ok(())
    }
}

/// Flat disk footprint. Offsets are pixel centers within Euclidean radius
/// `(diameter - 1) / 2`, inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    diameter: usize,
    offsets: Vec<(isize, isize)>,
}

impl StructuringElement {
    pub fn disk(diameter: usize) -> Result<Self> {
        if diameter < 3 || diameter % 2 == 0 {
            return Err(Error::invalid(format!(
                "structuring element diameter must be odd and >= 3, got {diameter}"
            )));
        }
        let radius = ((diameter - 1) / 2) as isize;
        let r2 = radius * radius;
        let mut offsets = Vec::new();
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                if dr * dr + dc * dc <= r2 {
                    offsets.push((dr, dc));
                }
            }
        }
        Ok(Self { diameter, offsets })
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn radius(&self) -> usize {
        (self.diameter - 1) / 2
    }

    /// Footprint offsets `(drow, dcol)`.
    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::disk(11).expect("11 is a valid diameter")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_samples() {
        assert!(RasterImage::new(1, 2, 1, vec![0.0, 1.5]).is_err());
        assert!(RasterImage::new(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(RasterImage::new(0, 1, 1, vec![]).is_err());
        assert!(RasterImage::new(1, 1, 2, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn disk_is_centrosymmetric() {
        for d in [3, 5, 11, 21] {
            let se = StructuringElement::disk(d).unwrap();
            for &(dr, dc) in se.offsets() {
                assert!(se.offsets().contains(&(-dr, -dc)));
            }
        }
        assert!(StructuringElement::disk(4).is_err());
        assert!(StructuringElement::disk(1).is_err());
    }

    #[test]
    fn disk_3_is_a_cross() {
        let se = StructuringElement::disk(3).unwrap();
        assert_eq!(se.offsets().len(), 5);
        assert_eq!(StructuringElement::default().offsets().len(), 81);
    }

    #[test]
    fn planes_round_trip() {
        let rgb = RasterImage::new(1, 2, 3, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let back = RasterImage::from_planes(
            &rgb.plane(0).unwrap(),
            &rgb.plane(1).unwrap(),
            &rgb.plane(2).unwrap(),
        )
        .unwrap();
        assert_eq!(rgb, back);
    }
}
