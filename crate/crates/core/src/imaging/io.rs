//! PNG / PPM / PGM reading and writing. 8-bit samples map to `v / 255`.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma, RgbImage};

use super::{BinaryMask, RasterImage};
use crate::error::{Error, Result};

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn save(img: &DynamicImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Loads an image as RGB (3 channels). Gray inputs are replicated.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let rgb = open(path)?.to_rgb8();
    let (w, h) = rgb.dimensions();
    let samples = rgb.as_raw().iter().map(|v| *v as f64 / 255.0).collect();
    RasterImage::new(h as usize, w as usize, 3, samples)
}

/// Loads an image as single-channel luminance.
pub fn load_gray(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let g = open(path)?.to_luma8();
    let (w, h) = g.dimensions();
    let samples = g.as_raw().iter().map(|v| *v as f64 / 255.0).collect();
    RasterImage::new(h as usize, w as usize, 1, samples)
}

/// Loads a 0/255 mask; any nonzero luminance counts as set.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let g = open(path)?.to_luma8();
    let (w, h) = g.dimensions();
    BinaryMask::from_bits(
        h as usize,
        w as usize,
        g.as_raw().iter().map(|v| *v != 0).collect(),
    )
}

pub fn save_image(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = img.dims();
    let raw: Vec<u8> = img.samples().iter().map(|v| quantize(*v)).collect();
    let dynimg = match img.channels() {
        1 => DynamicImage::ImageLuma8(
            GrayImage::from_raw(w as u32, h as u32, raw).expect("buffer size"),
        ),
        _ => DynamicImage::ImageRgb8(
            RgbImage::from_raw(w as u32, h as u32, raw).expect("buffer size"),
        ),
    };
    save(&dynimg, path)
}

pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let (h, w) = mask.dims();
    let raw = mask.bits().iter().map(|b| if *b { 255 } else { 0 }).collect();
    let g = GrayImage::from_raw(w as u32, h as u32, raw).expect("buffer size");
    save(&DynamicImage::ImageLuma8(g), path.as_ref())
}

/// Writes a label image (one byte per pixel) as 8-bit gray PNG.
pub fn save_labels(height: usize, width: usize, labels: &[u8], path: impl AsRef<Path>) -> Result<()> {
    let g = GrayImage::from_raw(width as u32, height as u32, labels.to_vec()).expect("buffer size");
    save(&DynamicImage::ImageLuma8(g), path.as_ref())
}

/// Writes values in `[0, 1]` as a 16-bit gray PNG (`v * 65535`).
pub fn save_gray16(height: usize, width: usize, values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let raw: Vec<u16> = values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width as u32, height as u32, raw).expect("buffer size");
    save(&DynamicImage::ImageLuma16(buf), path.as_ref())
}

/// Reads a 16-bit gray PNG back into `[0, 1]` values.
pub fn load_gray16(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    let path = path.as_ref();
    let g = open(path)?.to_luma16();
    let (w, h) = g.dimensions();
    let values = g.as_raw().iter().map(|v| *v as f64 / 65535.0).collect();
    Ok((h as usize, w as usize, values))
}
