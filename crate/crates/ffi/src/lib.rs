//! C ABI for loading a trained wildrisk model, scoring feature rows and
//! running counterfactual scenarios.
//!
//! Every fallible function returns a [`WrStatus`]. On failure a message is
//! kept per thread and read with [`wr_last_error`]. Feature rows are
//! row-major `double` arrays in predictor order: population density, NDVI,
//! PDSI, tree-mortality area, tree-mortality number, altitude.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wildrisk::counterfactual::{sweep, Scenario};
use wildrisk::features::{DynamicSample, FeatureVector, Task, N_FEATURES};
use wildrisk::grid::CellId;
use wildrisk::models::TrainedModel;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WrStatus {
    Ok = 0,
    /// A required pointer was NULL.
    NullArgument = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// Bad input: malformed model, wrong row width, invalid scenario.
    InvalidInput = 3,
    /// A valid request failed while running.
    Runtime = 4,
    /// The caller's buffer cannot hold the result.
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Opaque handle to a loaded model.
pub struct WrModel {
    inner: TrainedModel,
}

/// Counts from one counterfactual scenario.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WrScenarioCounts {
    pub baseline: usize,
    pub treated: usize,
    pub flips: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: WrStatus, msg: impl Into<String>) -> WrStatus {
    set_error(msg);
    status
}

fn from_core(e: wildrisk::Error) -> WrStatus {
    let status = if e.is_validation() { WrStatus::InvalidInput } else { WrStatus::Runtime };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> WrStatus) -> WrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == WrStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(WrStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, WrStatus> {
    if p.is_null() {
        return Err(fail(WrStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(WrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn rows_arg<'a>(rows: *const f64, n_rows: usize, n_features: usize) -> Result<&'a [f64], WrStatus> {
    if n_features != N_FEATURES {
        return Err(fail(WrStatus::InvalidInput, format!("rows must have {N_FEATURES} features, got {n_features}")));
    }
    if n_rows == 0 {
        return Ok(&[]);
    }
    if rows.is_null() {
        return Err(fail(WrStatus::NullArgument, "rows is NULL"));
    }
    let len = n_rows.checked_mul(n_features).ok_or_else(|| fail(WrStatus::InvalidInput, "row count overflows"))?;
    Ok(std::slice::from_raw_parts(rows, len))
}

fn load(text: &str, out: *mut *mut WrModel) -> WrStatus {
    match TrainedModel::from_json(text) {
        Ok(inner) => {
            // SAFETY: checked non-null by callers
            unsafe { *out = Box::into_raw(Box::new(WrModel { inner })) };
            WrStatus::Ok
        }
        Err(e) => from_core(e),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread; empty after a success.
/// Valid until the next wildrisk call on the same thread.
#[no_mangle]
pub extern "C" fn wr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads a model document from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wr_model_load(path: *const c_char, out: *mut *mut WrModel) -> WrStatus {
    guard(|| {
        if out.is_null() {
            return fail(WrStatus::NullArgument, "out is NULL");
        }
        *out = ptr::null_mut();
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match std::fs::read_to_string(path) {
            Ok(text) => load(&text, out),
            Err(e) => fail(WrStatus::Runtime, format!("{path}: {e}")),
        }
    })
}

/// Parses a model document held in memory.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wr_model_from_json(json: *const c_char, out: *mut *mut WrModel) -> WrStatus {
    guard(|| {
        if out.is_null() {
            return fail(WrStatus::NullArgument, "out is NULL");
        }
        *out = ptr::null_mut();
        match str_arg(json, "json") {
            Ok(text) => load(text, out),
            Err(s) => s,
        }
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from a wildrisk loader and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wr_model_free(model: *mut WrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of output classes (2 for the dynamic task, 3 for the static one).
///
/// # Safety
/// `model` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn wr_model_n_classes(model: *const WrModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.class_labels.len())
}

/// True when the model predicts per-year binary risk.
///
/// # Safety
/// `model` must be a live handle or NULL (returns false).
#[no_mangle]
pub unsafe extern "C" fn wr_model_is_dynamic(model: *const WrModel) -> bool {
    model.as_ref().is_some_and(|m| m.inner.task == Task::Dynamic)
}

/// Copies the hex content hash (64 characters plus NUL) into `buf`.
///
/// # Safety
/// `model` must be a live handle and `buf` writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn wr_model_hash(model: *const WrModel, buf: *mut c_char, len: usize) -> WrStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), buf.is_null()) else {
            return fail(WrStatus::NullArgument, "model or buf is NULL");
        };
        let hash = m.inner.content_hash.as_bytes();
        if len < hash.len() + 1 {
            return fail(WrStatus::BufferTooSmall, format!("hash needs {} bytes", hash.len() + 1));
        }
        ptr::copy_nonoverlapping(hash.as_ptr().cast(), buf, hash.len());
        *buf.add(hash.len()) = 0;
        WrStatus::Ok
    })
}

/// Predicted class index per row.
///
/// # Safety
/// `rows` must hold `n_rows * n_features` doubles and `out_classes`
/// `n_rows` writable slots.
#[no_mangle]
pub unsafe extern "C" fn wr_model_predict(
    model: *const WrModel,
    rows: *const f64,
    n_rows: usize,
    n_features: usize,
    out_classes: *mut u32,
) -> WrStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(WrStatus::NullArgument, "model is NULL");
        };
        let rows = match rows_arg(rows, n_rows, n_features) {
            Ok(r) => r,
            Err(s) => return s,
        };
        if n_rows > 0 && out_classes.is_null() {
            return fail(WrStatus::NullArgument, "out_classes is NULL");
        }
        for (i, r) in rows.chunks_exact(n_features).enumerate() {
            match m.inner.predict(r) {
                Ok(c) => *out_classes.add(i) = c as u32,
                Err(e) => return from_core(e),
            }
        }
        WrStatus::Ok
    })
}

/// Class scores, `n_rows × n_classes` row-major.
///
/// # Safety
/// `rows` must hold `n_rows * n_features` doubles and `out_scores`
/// `n_rows * wr_model_n_classes(model)` writable slots.
#[no_mangle]
pub unsafe extern "C" fn wr_model_predict_proba(
    model: *const WrModel,
    rows: *const f64,
    n_rows: usize,
    n_features: usize,
    out_scores: *mut f64,
) -> WrStatus {
    guard(|| {
        let Some(m) = model.as_ref() else {
            return fail(WrStatus::NullArgument, "model is NULL");
        };
        let rows = match rows_arg(rows, n_rows, n_features) {
            Ok(r) => r,
            Err(s) => return s,
        };
        if n_rows > 0 && out_scores.is_null() {
            return fail(WrStatus::NullArgument, "out_scores is NULL");
        }
        let k = m.inner.class_labels.len();
        for (i, r) in rows.chunks_exact(n_features).enumerate() {
            match m.inner.predict_proba(r) {
                Ok(s) => ptr::copy_nonoverlapping(s.as_ptr(), out_scores.add(i * k), k),
                Err(e) => return from_core(e),
            }
        }
        WrStatus::Ok
    })
}

unsafe fn dynamic_rows(m: &WrModel, rows: *const f64, n_rows: usize, n_features: usize) -> Result<Vec<DynamicSample>, WrStatus> {
    if m.inner.task != Task::Dynamic {
        return Err(fail(WrStatus::InvalidInput, "model was not trained on the dynamic task"));
    }
    let flat = rows_arg(rows, n_rows, n_features)?;
    Ok(flat
        .chunks_exact(n_features)
        .enumerate()
        .map(|(i, r)| {
            let mut a = [0.0; N_FEATURES];
            a.copy_from_slice(r);
            DynamicSample { cell: CellId::new(i, 0), year: 0, features: FeatureVector::from_array(a), label: 0 }
        })
        .collect())
}

/// Number of rows a dynamic model predicts at risk.
///
/// # Safety
/// `rows` must hold `n_rows * n_features` doubles; `out_count` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn wr_count_risk(
    model: *const WrModel,
    rows: *const f64,
    n_rows: usize,
    n_features: usize,
    out_count: *mut usize,
) -> WrStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), out_count.is_null()) else {
            return fail(WrStatus::NullArgument, "model or out_count is NULL");
        };
        let samples = match dynamic_rows(m, rows, n_rows, n_features) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match wildrisk::counterfactual::count_risk_cells(&m.inner, &samples) {
            Ok(n) => {
                *out_count = n;
                WrStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Applies one scenario to one year's rows and compares at-risk counts.
///
/// `kind` is `pdsi_delta`, `clear_mortality`, `ndvi_scale` or
/// `population_scale`; `parameter` is ignored when `has_parameter` is false.
///
/// # Safety
/// `kind` must be NUL-terminated, `rows` must hold `n_rows * n_features`
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wr_counterfactual(
    model: *const WrModel,
    rows: *const f64,
    n_rows: usize,
    n_features: usize,
    kind: *const c_char,
    parameter: f64,
    has_parameter: bool,
    out: *mut WrScenarioCounts,
) -> WrStatus {
    guard(|| {
        let (Some(m), false) = (model.as_ref(), out.is_null()) else {
            return fail(WrStatus::NullArgument, "model or out is NULL");
        };
        let kind = match str_arg(kind, "kind") {
            Ok(k) => k,
            Err(s) => return s,
        };
        let scenario = match Scenario::from_parts(kind, has_parameter.then_some(parameter)) {
            Ok(s) => s,
            Err(e) => return from_core(e),
        };
        let samples = match dynamic_rows(m, rows, n_rows, n_features) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match sweep(&m.inner, &samples, &[scenario]) {
            Ok(r) => {
                *out = WrScenarioCounts { baseline: r[0].baseline_risk_cells, treated: r[0].treated_risk_cells, flips: r[0].flips.len() };
                WrStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}
