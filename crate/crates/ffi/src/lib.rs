//! C ABI over `rcg-core`.
//!
//! Datasets and reduction results are opaque heap handles owned by the
//! caller and released with their `_free` function. Every fallible call
//! returns an [`RcgStatus`]; on failure `rcg_last_error_message` describes
//! the error for the calling thread. Panics never cross the boundary: they
//! are caught and reported as `RCG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rcg_core::data::{load_csv, CsvOptions, Dataset, FeatureMask, InstanceMask};
use rcg_core::error::RcgError;
use rcg_core::reduction::{reduce, subset_state, Algorithm, AlgorithmConfig};
use rcg_core::stats::chi_square_quantile;
use rcg_core::uncertainty::{quadratic_entropy, Significance};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcgStatus {
    Ok = 0,
    /// Invalid argument or configuration.
    Usage = 1,
    /// Unreadable or malformed data.
    Data = 2,
    /// Single-class sample or non-positive degrees of freedom.
    Degenerate = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcgAlgorithm {
    None = 0,
    Fsrcg = 1,
    Psrcg = 2,
    Fsps = 3,
    FsrcgThenPsrcg = 4,
    Cnn = 5,
    Rnn = 6,
}

/// Reduction settings. Obtain defaults from `rcg_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcgConfig {
    pub k: usize,
    /// True selects the fixed `epsilon` margin instead of the chi-square
    /// test at level `alpha`.
    pub use_epsilon: bool,
    pub alpha: f64,
    pub epsilon: f64,
    pub rollback_last_deletion: bool,
    /// 0 means `max(c, k + 2)`.
    pub min_alive: usize,
    pub normalize: bool,
    pub literal_min: bool,
    pub final_centers_pass: bool,
    pub pre_purge_baseline: bool,
}

/// Opaque labeled dataset.
pub struct RcgDataset {
    inner: Dataset,
}

/// Opaque reduction result.
pub struct RcgReduction {
    features: FeatureMask,
    instances: InstanceMask,
    final_rcg: Option<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(e: RcgError) -> RcgStatus {
    set_error(e.to_string());
    match e.exit_code() {
        1 => RcgStatus::Usage,
        3 => RcgStatus::Degenerate,
        _ => RcgStatus::Data,
    }
}

fn null(what: &str) -> RcgStatus {
    set_error(format!("null pointer: {what}"));
    RcgStatus::NullPointer
}

fn guard(f: impl FnOnce() -> RcgStatus) -> RcgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            RcgStatus::Panic
        }
    }
}

unsafe fn utf8_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, RcgStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        RcgStatus::Usage
    })
}

impl From<RcgAlgorithm> for Algorithm {
    fn from(a: RcgAlgorithm) -> Self {
        match a {
            RcgAlgorithm::None => Algorithm::None,
            RcgAlgorithm::Fsrcg => Algorithm::Fsrcg,
            RcgAlgorithm::Psrcg => Algorithm::Psrcg,
            RcgAlgorithm::Fsps => Algorithm::Fsps,
            RcgAlgorithm::FsrcgThenPsrcg => Algorithm::FsrcgThenPsrcg,
            RcgAlgorithm::Cnn => Algorithm::Cnn,
            RcgAlgorithm::Rnn => Algorithm::Rnn,
        }
    }
}

impl From<&RcgConfig> for AlgorithmConfig {
    fn from(c: &RcgConfig) -> Self {
        AlgorithmConfig {
            k: c.k,
            significance: if c.use_epsilon {
                Significance::EpsilonMargin { epsilon: c.epsilon }
            } else {
                Significance::ChiSquare { alpha: c.alpha }
            },
            rollback_last_deletion: c.rollback_last_deletion,
            min_alive: (c.min_alive != 0).then_some(c.min_alive),
            normalize: c.normalize,
            literal_min: c.literal_min,
            final_centers_pass: c.final_centers_pass,
            pre_purge_baseline: c.pre_purge_baseline,
        }
    }
}

#[no_mangle]
pub extern "C" fn rcg_config_default() -> RcgConfig {
    let d = AlgorithmConfig::default();
    let (use_epsilon, alpha, epsilon) = match d.significance {
        Significance::ChiSquare { alpha } => (false, alpha, 0.0),
        Significance::EpsilonMargin { epsilon } => (true, 0.05, epsilon),
    };
    RcgConfig {
        k: d.k,
        use_epsilon,
        alpha,
        epsilon,
        rollback_last_deletion: d.rollback_last_deletion,
        min_alive: d.min_alive.unwrap_or(0),
        normalize: d.normalize,
        literal_min: d.literal_min,
        final_centers_pass: d.final_centers_pass,
        pre_purge_baseline: d.pre_purge_baseline,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rcg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or "" if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rcg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a CSV with a header row. Column kinds are inferred.
///
/// # Safety
/// `path` and `class_column` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rcg_dataset_load_csv(
    path: *const c_char,
    class_column: *const c_char,
    out: *mut *mut RcgDataset,
) -> RcgStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let (path, class_column) = match (utf8_arg(path, "path"), utf8_arg(class_column, "class_column")) {
            (Ok(p), Ok(c)) => (p, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match load_csv(path, class_column, &CsvOptions::default()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RcgDataset { inner }));
                RcgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds a numeric dataset from a row-major `n_rows x n_features` matrix
/// and one label per row (labels must cover `0..c` for some `c >= 2`).
///
/// # Safety
/// `values` must point to `n_rows * n_features` doubles, `labels` to
/// `n_rows` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcg_dataset_from_numeric(
    values: *const f64,
    n_rows: usize,
    n_features: usize,
    labels: *const usize,
    out: *mut *mut RcgDataset,
) -> RcgStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        if values.is_null() || labels.is_null() {
            return null("values or labels");
        }
        let Some(total) = n_rows.checked_mul(n_features) else {
            set_error("n_rows * n_features overflows");
            return RcgStatus::Usage;
        };
        let flat = std::slice::from_raw_parts(values, total);
        let rows: Vec<Vec<f64>> = flat.chunks(n_features.max(1)).take(n_rows).map(<[f64]>::to_vec).collect();
        let labels = std::slice::from_raw_parts(labels, n_rows);
        match Dataset::from_numeric(&rows, labels) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RcgDataset { inner }));
                RcgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `ds` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcg_dataset_free(ds: *mut RcgDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn rcg_dataset_rows(ds: *const RcgDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_rows())
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn rcg_dataset_features(ds: *const RcgDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_features())
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn rcg_dataset_classes(ds: *const RcgDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.n_classes())
}

/// Runs `algorithm` over every row of `ds`.
///
/// # Safety
/// `ds` must be a live dataset handle, `config` null (defaults) or valid,
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcg_reduce(
    ds: *const RcgDataset,
    algorithm: RcgAlgorithm,
    config: *const RcgConfig,
    out: *mut *mut RcgReduction,
) -> RcgStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let Some(ds) = ds.as_ref() else { return null("dataset") };
        let cfg: AlgorithmConfig = config.as_ref().map(AlgorithmConfig::from).unwrap_or_default();
        let ds = &ds.inner;
        let train = InstanceMask::full(ds.n_rows());
        match reduce(ds, &train, algorithm.into(), &cfg) {
            Ok(o) => {
                let final_rcg = subset_state(ds, &train, &o.instances, &o.features, &cfg).ok().map(|s| s.rcg);
                *out = Box::into_raw(Box::new(RcgReduction { features: o.features, instances: o.instances, final_rcg }));
                RcgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `r` must be null or a reduction handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rcg_reduction_free(r: *mut RcgReduction) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be null or a live reduction handle.
#[no_mangle]
pub unsafe extern "C" fn rcg_reduction_kept_instances(r: *const RcgReduction) -> usize {
    r.as_ref().map_or(0, |r| r.instances.alive_count())
}

/// # Safety
/// `r` must be null or a live reduction handle.
#[no_mangle]
pub unsafe extern "C" fn rcg_reduction_selected_features(r: *const RcgReduction) -> usize {
    r.as_ref().map_or(0, |r| r.features.selected_count())
}

unsafe fn copy_mask(bits: &[bool], out: *mut u8, len: usize) -> RcgStatus {
    if out.is_null() {
        return null("out");
    }
    if len != bits.len() {
        set_error(format!("mask buffer holds {len} entries, expected {}", bits.len()));
        return RcgStatus::Usage;
    }
    let dst = std::slice::from_raw_parts_mut(out, len);
    for (d, &b) in dst.iter_mut().zip(bits) {
        *d = u8::from(b);
    }
    RcgStatus::Ok
}

/// Writes 1 for every kept row and 0 otherwise; `len` must equal the
/// dataset's row count.
///
/// # Safety
/// `r` must be a live reduction handle and `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rcg_reduction_instance_mask(r: *const RcgReduction, out: *mut u8, len: usize) -> RcgStatus {
    guard(|| match r.as_ref() {
        Some(r) => copy_mask(r.instances.as_bools(), out, len),
        None => null("reduction"),
    })
}

/// Writes 1 for every selected feature and 0 otherwise; `len` must equal
/// the dataset's feature count.
///
/// # Safety
/// `r` must be a live reduction handle and `out` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rcg_reduction_feature_mask(r: *const RcgReduction, out: *mut u8, len: usize) -> RcgStatus {
    guard(|| match r.as_ref() {
        Some(r) => copy_mask(r.features.as_bools(), out, len),
        None => null("reduction"),
    })
}

/// RCG of the reduced set. Fails with `RCG_STATUS_DEGENERATE` when it is
/// undefined (fewer than two classes survive).
///
/// # Safety
/// `r` must be a live reduction handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcg_reduction_final_rcg(r: *const RcgReduction, out: *mut f64) -> RcgStatus {
    guard(|| {
        let Some(r) = r.as_ref() else { return null("reduction") };
        if out.is_null() {
            return null("out");
        }
        match r.final_rcg {
            Some(v) => {
                *out = v;
                RcgStatus::Ok
            }
            None => {
                set_error("RCG is undefined for the reduced set");
                RcgStatus::Degenerate
            }
        }
    })
}

/// Quadratic entropy `sum g (1 - g)` of a probability vector.
///
/// # Safety
/// `dist` must point to `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rcg_quadratic_entropy(dist: *const f64, len: usize, out: *mut f64) -> RcgStatus {
    guard(|| {
        if dist.is_null() || out.is_null() {
            return null("dist or out");
        }
        match quadratic_entropy(std::slice::from_raw_parts(dist, len)) {
            Ok(v) => {
                *out = v;
                RcgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Quantile of the chi-square distribution with `df` degrees of freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcg_chi_square_quantile(p: f64, df: f64, out: *mut f64) -> RcgStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match chi_square_quantile(p, df) {
            Ok(v) => {
                *out = v;
                RcgStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
