//! C ABI for `depthq`.
//!
//! Maps cross the boundary as opaque handles created by `dq_*_new` or
//! `dq_*_load_png` and released with the matching `dq_*_free`. Every
//! fallible call returns a [`DqStatus`]; on failure the message is available
//! from [`dq_last_error_message`] on the same thread. Output handles are
//! written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use depthq::edge_consistency::{edge_consistency_map, fallback_contour, EcOutput};
use depthq::fusion::{quality_weighted_fuse, QualityBundle};
use depthq::metrics::evaluate;
use depthq::regional_uncertainty::{regional_uncertainty_map, RuConfig};
use depthq::superpixels::SlicOptions;
use depthq::{Error, GrayMap, RgbMap};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Io = 4,
    DegenerateInput = 5,
    NoAnchors = 6,
    Panic = 7,
}

/// Grayscale map of `f64` values in row-major order.
pub struct DqGrayMap {
    inner: GrayMap,
}

/// 8-bit RGB image.
pub struct DqRgbMap {
    inner: RgbMap,
}

/// Diagnostics of an edge-consistency map.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DqEcMeta {
    pub tc: f64,
    pub ta: f64,
    pub apc_count: usize,
    pub apa_count: usize,
    pub low_confidence: bool,
}

/// Evaluation of one saliency map. The F-measure fields are meaningful only
/// when `has_f` is set (ground truth with foreground).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DqMetrics {
    pub sm: f64,
    pub adp_e: f64,
    pub max_e: f64,
    pub adp_f: f64,
    pub mean_f: f64,
    pub max_f: f64,
    pub mae: f64,
    pub has_f: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(DqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Shape { .. } => DqStatus::ShapeMismatch,
            Error::Degenerate(_) | Error::DegenerateGroundTruth => DqStatus::DegenerateInput,
            Error::NoAnchors => DqStatus::NoAnchors,
            Error::Io { .. } | Error::Image { .. } | Error::Json(_) | Error::Csv(_) => DqStatus::Io,
            _ => DqStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DqStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DqStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            DqStatus::Panic
        }
    }
}

unsafe fn gray<'a>(p: *const DqGrayMap, what: &str) -> Result<&'a GrayMap, Failure> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null(what))
}

unsafe fn opt_gray<'a>(p: *const DqGrayMap) -> Option<&'a GrayMap> {
    p.as_ref().map(|m| &m.inner)
}

unsafe fn rgb<'a>(p: *const DqRgbMap, what: &str) -> Result<&'a RgbMap, Failure> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null(what))
}

unsafe fn c_path<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DqStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn put_gray(out: *mut *mut DqGrayMap, map: GrayMap) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(DqGrayMap { inner: map }));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next `dq_*` call on the same thread.
#[no_mangle]
pub extern "C" fn dq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Copies `width * height` values from `data`. Values must be finite.
///
/// # Safety
/// `data` must point to `width * height` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dq_gray_new(
    width: usize,
    height: usize,
    data: *const f64,
    out: *mut *mut DqGrayMap,
) -> DqStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Failure(DqStatus::InvalidArgument, "size overflow".into()))?;
        let values = std::slice::from_raw_parts(data, n).to_vec();
        put_gray(out, GrayMap::new(width, height, values)?)
    })
}

/// # Safety
/// `map` must be null or a handle from this library that is not used again.
#[no_mangle]
pub unsafe extern "C" fn dq_gray_free(map: *mut DqGrayMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dq_gray_width(map: *const DqGrayMap) -> usize {
    opt_gray(map).map_or(0, GrayMap::width)
}

/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dq_gray_height(map: *const DqGrayMap) -> usize {
    opt_gray(map).map_or(0, GrayMap::height)
}

/// Copies the values into `out`, which must hold `len >= width * height`
/// doubles.
///
/// # Safety
/// `map` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dq_gray_copy_data(
    map: *const DqGrayMap,
    out: *mut f64,
    len: usize,
) -> DqStatus {
    guard(|| {
        let m = gray(map, "map")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < m.len() {
            return Err(Failure(
                DqStatus::InvalidArgument,
                format!("buffer holds {len} values, map has {}", m.len()),
            ));
        }
        ptr::copy_nonoverlapping(m.data().as_ptr(), out, m.len());
        Ok(())
    })
}

/// Loads an 8- or 16-bit image as gray values in `[0, 1]`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dq_gray_load_png(
    path: *const c_char,
    out: *mut *mut DqGrayMap,
) -> DqStatus {
    guard(|| put_gray(out, depthq::io::load_gray(c_path(path)?)?))
}

/// Saves as 8-bit grayscale PNG.
///
/// # Safety
/// `map` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dq_gray_save_png(map: *const DqGrayMap, path: *const c_char) -> DqStatus {
    guard(|| Ok(depthq::io::save_gray_png(gray(map, "map")?, c_path(path)?)?))
}

/// Copies `3 * width * height` interleaved RGB bytes.
///
/// # Safety
/// `data` must point to `3 * width * height` readable bytes; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dq_rgb_new(
    width: usize,
    height: usize,
    data: *const u8,
    out: *mut *mut DqRgbMap,
) -> DqStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .ok_or_else(|| Failure(DqStatus::InvalidArgument, "size overflow".into()))?;
        let bytes = std::slice::from_raw_parts(data, n);
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let inner = RgbMap::new(width, height, pixels)?;
        *out = Box::into_raw(Box::new(DqRgbMap { inner }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dq_rgb_load_png(path: *const c_char, out: *mut *mut DqRgbMap) -> DqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = depthq::io::load_rgb(c_path(path)?)?;
        *out = Box::into_raw(Box::new(DqRgbMap { inner }));
        Ok(())
    })
}

/// # Safety
/// `map` must be null or a handle from this library that is not used again.
#[no_mangle]
pub unsafe extern "C" fn dq_rgb_free(map: *mut DqRgbMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

unsafe fn run_ec(
    image: *const DqRgbMap,
    depth: *const DqGrayMap,
    contour: *const DqGrayMap,
    slic_seed: u64,
) -> Result<(EcOutput, SlicOptions), Failure> {
    let image = rgb(image, "rgb")?;
    let depth = gray(depth, "depth")?;
    let fallback;
    let contour = match opt_gray(contour) {
        Some(c) => c,
        None => {
            fallback = fallback_contour(image)?;
            &fallback
        }
    };
    let slic = SlicOptions {
        seed: slic_seed,
        ..SlicOptions::default()
    };
    let cfg = Default::default();
    Ok((
        edge_consistency_map(image, depth, contour, &cfg, &slic)?,
        slic,
    ))
}

/// Edge-consistency map with default parameters. `contour` may be null, in
/// which case the RGB luminance gradient is used. `meta` may be null.
///
/// # Safety
/// Handles must be live (or null where allowed); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dq_edge_consistency(
    image: *const DqRgbMap,
    depth: *const DqGrayMap,
    contour: *const DqGrayMap,
    slic_seed: u64,
    out: *mut *mut DqGrayMap,
    meta: *mut DqEcMeta,
) -> DqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (ec, _) = run_ec(image, depth, contour, slic_seed)?;
        if let Some(m) = meta.as_mut() {
            *m = DqEcMeta {
                tc: ec.meta.tc,
                ta: ec.meta.ta,
                apc_count: ec.meta.apc_count,
                apa_count: ec.meta.apa_count,
                low_confidence: ec.meta.low_confidence,
            };
        }
        put_gray(out, ec.map)
    })
}

/// Regional-uncertainty map with default parameters, anchored on the
/// edge-consistency anchors of the same inputs. `low_confidence` may be
/// null.
///
/// # Safety
/// Handles must be live (or null where allowed); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dq_regional_uncertainty(
    image: *const DqRgbMap,
    depth: *const DqGrayMap,
    contour: *const DqGrayMap,
    slic_seed: u64,
    out: *mut *mut DqGrayMap,
    low_confidence: *mut bool,
) -> DqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (ec, slic) = run_ec(image, depth, contour, slic_seed)?;
        let ru = regional_uncertainty_map(
            rgb(image, "rgb")?,
            gray(depth, "depth")?,
            &ec.apa,
            &RuConfig::default(),
            &slic,
        )?;
        if let Some(flag) = low_confidence.as_mut() {
            *flag = ru.meta.low_confidence;
        }
        put_gray(out, ru.map)
    })
}

/// `|sal_rgbr - sal_rgbd|` per pixel.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dq_model_variance(
    sal_rgbd: *const DqGrayMap,
    sal_rgbr: *const DqGrayMap,
    out: *mut *mut DqGrayMap,
) -> DqStatus {
    guard(|| {
        let mv = depthq::model_variance::model_variance(
            gray(sal_rgbd, "sal_rgbd")?,
            gray(sal_rgbr, "sal_rgbr")?,
        )?;
        put_gray(out, mv)
    })
}

/// Quality-weighted fusion. Any of `ec`, `ru`, `mv` may be null to leave
/// that map out.
///
/// # Safety
/// Handles must be live (or null where allowed); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dq_fuse(
    sal_rgb: *const DqGrayMap,
    sal_d: *const DqGrayMap,
    ec: *const DqGrayMap,
    ru: *const DqGrayMap,
    mv: *const DqGrayMap,
    out: *mut *mut DqGrayMap,
) -> DqStatus {
    guard(|| {
        let bundle = QualityBundle {
            ec: opt_gray(ec).cloned(),
            ru: opt_gray(ru).cloned(),
            mv: opt_gray(mv).cloned(),
            ..Default::default()
        };
        let fused =
            quality_weighted_fuse(gray(sal_rgb, "sal_rgb")?, gray(sal_d, "sal_d")?, &bundle)?;
        put_gray(out, fused)
    })
}

/// All evaluation metrics of one saliency map.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dq_evaluate(
    sal: *const DqGrayMap,
    gt: *const DqGrayMap,
    out: *mut DqMetrics,
) -> DqStatus {
    guard(|| {
        let sal = gray(sal, "sal")?;
        let gt = gray(gt, "gt")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (m, _) = evaluate("", sal, gt)?;
        *out = DqMetrics {
            sm: m.sm,
            adp_e: m.adp_e,
            max_e: m.max_e,
            adp_f: m.adp_f.unwrap_or(0.0),
            mean_f: m.mean_f.unwrap_or(0.0),
            max_f: m.max_f.unwrap_or(0.0),
            mae: m.mae,
            has_f: m.adp_f.is_some(),
        };
        Ok(())
    })
}
