//! C ABI for the pitchmarks detector.
//!
//! Handles (`PmConfig`, `PmDetection`) are opaque and owned by the caller
//! once returned; release them with the matching `*_free` function. Every
//! fallible call returns a [`PmStatus`]; on failure the message is available
//! from [`pm_last_error_message`] on the same thread until the next failing
//! call. Strings returned by the library are released with [`pm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pitchmarks::classify::PixelLabel;
use pitchmarks::config::RunConfig;
use pitchmarks::imaging::{BinaryMask, RasterImage};
use pitchmarks::pipeline::{detect, Detection};
use pitchmarks::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Config = 4,
    Io = 5,
    NoFit = 6,
    Camera = 7,
    OutOfRange = 8,
    Panic = 9,
}

impl From<&Error> for PmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => PmStatus::InvalidArgument,
            Error::DimensionMismatch { .. } => PmStatus::DimensionMismatch,
            Error::NoFit(_) => PmStatus::NoFit,
            Error::Config(_) => PmStatus::Config,
            Error::Io { .. } | Error::Image { .. } | Error::Format { .. } => PmStatus::Io,
            Error::Camera(_) => PmStatus::Camera,
        }
    }
}

/// Run configuration (all tunables).
pub struct PmConfig(RunConfig);

/// Result of one detection: line mask, probability image, per-pixel labels
/// and fitted primitives.
pub struct PmDetection(Detection);

/// Straight line `normal · (row, col) = offset` with the extremes of its support.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PmLine {
    pub normal: [f64; 2],
    pub offset: f64,
    /// `(row, col)` of both ends.
    pub endpoints: [[f64; 2]; 2],
    pub rmse: f64,
    pub pixel_count: usize,
}

/// Ellipse with center `(x, y) = (col, row)`, semi-axes and orientation.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PmEllipse {
    pub center: [f64; 2],
    pub axes: [f64; 2],
    pub theta: f64,
    pub rmse: f64,
    pub pixel_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: PmStatus, msg: impl Into<String>) -> PmStatus {
    set_error(msg);
    status
}

/// Runs `f`, mapping errors and panics to a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), (PmStatus, String)>) -> PmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PmStatus::Ok,
        Ok(Err((status, msg))) => fail(status, msg),
        Err(_) => fail(PmStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> (PmStatus, String) {
    (PmStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (PmStatus, String) {
    (PmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PmStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (PmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PmStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a, T>(out: *mut T, len: usize, needed: usize) -> Result<&'a mut [T], (PmStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < needed {
        return Err((PmStatus::OutOfRange, format!("output buffer holds {len} values, {needed} needed")));
    }
    Ok(std::slice::from_raw_parts_mut(out, needed))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn pm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration. Never null.
#[no_mangle]
pub extern "C" fn pm_config_new() -> *mut PmConfig {
    Box::into_raw(Box::new(PmConfig(RunConfig::default())))
}

/// Parses a TOML configuration; unknown keys and out-of-range values fail.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_config_from_toml(text: *const c_char, out: *mut *mut PmConfig) -> PmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = RunConfig::from_toml(str_arg(text, "text")?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PmConfig(cfg)));
        Ok(())
    })
}

/// Loads a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_config_load(path: *const c_char, out: *mut *mut PmConfig) -> PmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = RunConfig::load(str_arg(path, "path")?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PmConfig(cfg)));
        Ok(())
    })
}

/// The configuration as TOML; release with [`pm_string_free`].
///
/// # Safety
/// `cfg` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_config_to_toml(cfg: *const PmConfig, out: *mut *mut c_char) -> PmStatus {
    guard(|| {
        let cfg = handle(cfg, "config")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(cfg.0.to_toml()).map_err(|e| (PmStatus::InvalidArgument, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Sets the master random seed.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pm_config_set_seed(cfg: *mut PmConfig, seed: u64) -> PmStatus {
    guard(|| {
        handle(cfg, "config")?;
        (*cfg).0.seed = seed;
        Ok(())
    })
}

/// Sets the number of watershed experiments (>= 1).
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pm_config_set_experiments(cfg: *mut PmConfig, experiments: usize) -> PmStatus {
    guard(|| {
        handle(cfg, "config")?;
        let mut next = (*cfg).0.clone();
        next.experiments = experiments;
        next.validate().map_err(lib_err)?;
        (*cfg).0 = next;
        Ok(())
    })
}

/// Sets the line probability threshold, in (0, 1].
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pm_config_set_threshold(cfg: *mut PmConfig, threshold: f64) -> PmStatus {
    guard(|| {
        handle(cfg, "config")?;
        let mut next = (*cfg).0.clone();
        next.threshold = threshold;
        next.validate().map_err(lib_err)?;
        (*cfg).0 = next;
        Ok(())
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pm_config_free(cfg: *mut PmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Detects line marks in an 8-bit image of `height * width * channels`
/// interleaved samples (`channels` 1 or 3). `field` holds `height * width`
/// bytes, nonzero on the playing field, or is null for the whole frame.
///
/// # Safety
/// Buffers must hold the stated number of bytes; `cfg` must be a live
/// handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_detect(
    cfg: *const PmConfig,
    pixels: *const u8,
    height: usize,
    width: usize,
    channels: usize,
    field: *const u8,
    out: *mut *mut PmDetection,
) -> PmStatus {
    guard(|| {
        let cfg = handle(cfg, "config")?;
        if pixels.is_null() {
            return Err(null("pixels"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if channels != 1 && channels != 3 {
            return Err((PmStatus::InvalidArgument, format!("channels must be 1 or 3, got {channels}")));
        }
        let n = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| (PmStatus::InvalidArgument, "image size overflows".to_string()))?;
        let samples = std::slice::from_raw_parts(pixels, n).iter().map(|&v| v as f64 / 255.0).collect();
        let image = RasterImage::new(height, width, channels, samples).map_err(lib_err)?;
        let field = if field.is_null() {
            BinaryMask::full(height, width)
        } else {
            let bits = std::slice::from_raw_parts(field, height * width).iter().map(|&v| v != 0).collect();
            BinaryMask::from_bits(height, width, bits).map_err(lib_err)?
        };
        let det = detect(&image, &field, &cfg.0).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(PmDetection(det)));
        Ok(())
    })
}

/// Image height of a detection, or 0 for null.
///
/// # Safety
/// `det` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_height(det: *const PmDetection) -> usize {
    det.as_ref().map_or(0, |d| d.0.mask.height())
}

/// Image width of a detection, or 0 for null.
///
/// # Safety
/// `det` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_width(det: *const PmDetection) -> usize {
    det.as_ref().map_or(0, |d| d.0.mask.width())
}

/// Copies the binary line mask (1 = line pixel) into `out[0..height*width]`.
///
/// # Safety
/// `det` must be a live handle; `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_mask(det: *const PmDetection, out: *mut u8, len: usize) -> PmStatus {
    guard(|| {
        let d = handle(det, "detection")?;
        let bits = d.0.mask.bits();
        for (o, &b) in out_slice(out, len, bits.len())?.iter_mut().zip(bits) {
            *o = b as u8;
        }
        Ok(())
    })
}

/// Copies the line probabilities in `[0, 1]` into `out[0..height*width]`.
///
/// # Safety
/// `det` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_probability(det: *const PmDetection, out: *mut f64, len: usize) -> PmStatus {
    guard(|| {
        let d = handle(det, "detection")?;
        let values = d.0.probability.values();
        out_slice(out, len, values.len())?.copy_from_slice(&values);
        Ok(())
    })
}

/// Copies per-pixel labels (0 background or discarded, 1 line, 2 ellipse)
/// into `out[0..height*width]`.
///
/// # Safety
/// `det` must be a live handle; `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_labels(det: *const PmDetection, out: *mut u8, len: usize) -> PmStatus {
    guard(|| {
        let d = handle(det, "detection")?;
        let labels = d.0.classification.labels();
        for (o, l) in out_slice(out, len, labels.len())?.iter_mut().zip(labels) {
            *o = match l {
                PixelLabel::Line => 1,
                PixelLabel::Ellipse => 2,
                _ => 0,
            };
        }
        Ok(())
    })
}

/// Number of straight-line primitives, or 0 for null.
///
/// # Safety
/// `det` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_line_count(det: *const PmDetection) -> usize {
    det.as_ref().map_or(0, |d| d.0.classification.lines.len())
}

/// Number of ellipse primitives, or 0 for null.
///
/// # Safety
/// `det` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_ellipse_count(det: *const PmDetection) -> usize {
    det.as_ref().map_or(0, |d| d.0.classification.ellipses.len())
}

/// Writes straight line `index` to `out`.
///
/// # Safety
/// `det` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_line(det: *const PmDetection, index: usize, out: *mut PmLine) -> PmStatus {
    guard(|| {
        let d = handle(det, "detection")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = d.0.classification.document();
        let l = doc.lines.get(index).ok_or_else(|| (PmStatus::OutOfRange, format!("line {index} of {}", doc.lines.len())))?;
        *out = PmLine { normal: l.normal, offset: l.offset, endpoints: l.endpoints, rmse: l.rmse, pixel_count: l.pixel_count };
        Ok(())
    })
}

/// Writes ellipse `index` to `out`.
///
/// # Safety
/// `det` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_ellipse(det: *const PmDetection, index: usize, out: *mut PmEllipse) -> PmStatus {
    guard(|| {
        let d = handle(det, "detection")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = d.0.classification.ellipses.get(index).ok_or_else(|| {
            (PmStatus::OutOfRange, format!("ellipse {index} of {}", d.0.classification.ellipses.len()))
        })?;
        *out = PmEllipse {
            center: e.ellipse.center,
            axes: e.ellipse.axes,
            theta: e.ellipse.theta,
            rmse: e.ellipse.rmse,
            pixel_count: e.pixels.len(),
        };
        Ok(())
    })
}

/// Primitives as a JSON document; release with [`pm_string_free`].
///
/// # Safety
/// `det` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_to_json(det: *const PmDetection, out: *mut *mut c_char) -> PmStatus {
    guard(|| {
        let d = handle(det, "detection")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = d.0.classification.to_json().map_err(lib_err)?;
        *out = CString::new(json).map_err(|e| (PmStatus::InvalidArgument, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Releases a detection. Null is ignored.
///
/// # Safety
/// `det` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pm_detection_free(det: *mut PmDetection) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}
