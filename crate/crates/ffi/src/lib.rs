//! C ABI over `zeroday-core`.
//!
//! Every function returns a [`ZdStatus`]; on failure the message is kept per
//! thread and read back with [`zd_last_error`]. Handles are opaque and must be
//! released with their `_free` function. Strings handed out by the library are
//! released with [`zd_string_free`]. Matrices are dense row-major `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ndarray::ArrayView2;
use zeroday_core::classifiers::{fit, Family, FittedModel, Hyperparameters, ModelSpec};
use zeroday_core::dataset::{clean, load_csv, synthesize, Dataset, SynthConfig};
use zeroday_core::eval::{confusion, metrics, roc_auc};
use zeroday_core::experiment::{emit_reports, metrics_csv, run_experiment, ExperimentConfig};
use zeroday_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Runtime = 4,
    Panic = 5,
}

/// Loaded, cleaned dataset.
pub struct ZdDataset(Dataset);

/// Fitted classifier.
pub struct ZdModel(FittedModel);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZdMetrics {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub fpr: f64,
    /// Nonzero when a ratio had a zero denominator and was reported as 0.
    pub undefined: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(ZdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => ZdStatus::Io,
            e if e.is_config_error() => ZdStatus::InvalidArgument,
            _ => ZdStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(ZdStatus::InvalidArgument, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ZdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ZdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            ZdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(ZdStatus::NullPointer, "null pointer argument".into()))
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(ZdStatus::NullPointer, "null output pointer".into()))
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(ZdStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("string argument is not UTF-8"))
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(ZdStatus::NullPointer, "null array argument".into()));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn matrix<'a>(p: *const f64, rows: usize, cols: usize) -> Result<ArrayView2<'a, f64>, Failure> {
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| invalid("matrix dimensions overflow"))?;
    let data = slice(p, n)?;
    ArrayView2::from_shape((rows, cols), data).map_err(|e| invalid(e.to_string()))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(ZdStatus::Runtime, "output contains a NUL byte".into()))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zd_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn zd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads and cleans a NetFlow CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_dataset_load_csv(path: *const c_char, has_header: bool, out: *mut *mut ZdDataset) -> ZdStatus {
    guard(|| {
        let out = out_ref(out)?;
        let raw = load_csv(PathBuf::from(str_arg(path)?), has_header, None)?;
        let (d, _) = clean(&raw)?;
        *out = Box::into_raw(Box::new(ZdDataset(d)));
        Ok(())
    })
}

/// Generates a synthetic dataset with the default category mix.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_dataset_synthesize(
    n_rows: usize,
    n_features: usize,
    attack_fraction: f64,
    seed: u64,
    out: *mut *mut ZdDataset,
) -> ZdStatus {
    guard(|| {
        let out = out_ref(out)?;
        let d = synthesize(&SynthConfig {
            n_rows,
            n_features,
            attack_fraction,
            seed,
            ..Default::default()
        })?;
        *out = Box::into_raw(Box::new(ZdDataset(d)));
        Ok(())
    })
}

/// # Safety
/// `ds` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn zd_dataset_n_rows(ds: *const ZdDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_rows())
}

/// # Safety
/// `ds` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn zd_dataset_n_features(ds: *const ZdDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_features())
}

/// Copies the feature matrix (row-major) and labels out of a dataset.
/// Either output may be null to skip it.
///
/// # Safety
/// `features` must hold `n_rows * n_features` doubles and `labels` `n_rows` bytes.
#[no_mangle]
pub unsafe extern "C" fn zd_dataset_copy(ds: *const ZdDataset, features: *mut f64, labels: *mut u8) -> ZdStatus {
    guard(|| {
        let d = &deref(ds)?.0;
        if !features.is_null() {
            for (i, v) in d.features.iter().enumerate() {
                *features.add(i) = *v;
            }
        }
        if !labels.is_null() {
            ptr::copy_nonoverlapping(d.label.as_ptr(), labels, d.label.len());
        }
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn zd_dataset_free(ds: *mut ZdDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fits a model. `family` is LR, DT, RF, GBT (or XGB) or MLP;
/// `params_json` is a JSON object of hyperparameters or null for defaults.
///
/// # Safety
/// `x` must hold `rows * cols` doubles, `y` `rows` labels (0 or 1).
#[no_mangle]
pub unsafe extern "C" fn zd_model_fit(
    family: *const c_char,
    params_json: *const c_char,
    seed: u64,
    x: *const f64,
    rows: usize,
    cols: usize,
    y: *const u8,
    out: *mut *mut ZdModel,
) -> ZdStatus {
    guard(|| {
        let out = out_ref(out)?;
        let family: Family = str_arg(family)?.parse()?;
        let hyperparameters: Hyperparameters = if params_json.is_null() {
            Hyperparameters::new()
        } else {
            serde_json::from_str(str_arg(params_json)?).map_err(Error::from)?
        };
        let spec = ModelSpec {
            family,
            hyperparameters,
            seed,
        };
        let model = fit(&spec, matrix(x, rows, cols)?, slice(y, rows)?)?;
        *out = Box::into_raw(Box::new(ZdModel(model)));
        Ok(())
    })
}

/// Hard 0/1 predictions into `labels` (`rows` bytes).
///
/// # Safety
/// `x` must hold `rows * cols` doubles and `labels` `rows` bytes.
#[no_mangle]
pub unsafe extern "C" fn zd_model_predict(
    model: *const ZdModel,
    x: *const f64,
    rows: usize,
    cols: usize,
    labels: *mut u8,
) -> ZdStatus {
    guard(|| {
        let m = &deref(model)?.0;
        let pred = m.predict(matrix(x, rows, cols)?)?;
        if rows > 0 {
            ptr::copy_nonoverlapping(pred.as_ptr(), out_ref(labels)?, rows);
        }
        Ok(())
    })
}

/// Attack scores in `[0, 1]` into `scores` (`rows` doubles).
///
/// # Safety
/// `x` must hold `rows * cols` doubles and `scores` `rows` doubles.
#[no_mangle]
pub unsafe extern "C" fn zd_model_predict_score(
    model: *const ZdModel,
    x: *const f64,
    rows: usize,
    cols: usize,
    scores: *mut f64,
) -> ZdStatus {
    guard(|| {
        let m = &deref(model)?.0;
        let s = m.predict_score(matrix(x, rows, cols)?)?;
        if rows > 0 {
            ptr::copy_nonoverlapping(s.as_ptr(), out_ref(scores)?, rows);
        }
        Ok(())
    })
}

/// Serializes a model; free the result with [`zd_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_model_to_json(model: *const ZdModel, out: *mut *mut c_char) -> ZdStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = into_c_string(deref(model)?.0.to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_model_from_json(json: *const c_char, out: *mut *mut ZdModel) -> ZdStatus {
    guard(|| {
        let out = out_ref(out)?;
        let m = FittedModel::from_json(str_arg(json)?)?;
        *out = Box::into_raw(Box::new(ZdModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn zd_model_free(model: *mut ZdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Area under the ROC curve, ties counted as half.
///
/// # Safety
/// `y` and `scores` must each hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn zd_roc_auc(y: *const u8, scores: *const f64, n: usize, out: *mut f64) -> ZdStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = roc_auc(slice(y, n)?, slice(scores, n)?)?;
        Ok(())
    })
}

/// # Safety
/// `y_true` and `y_pred` must each hold `n` labels.
#[no_mangle]
pub unsafe extern "C" fn zd_confusion_metrics(
    y_true: *const u8,
    y_pred: *const u8,
    n: usize,
    out: *mut ZdMetrics,
) -> ZdStatus {
    guard(|| {
        let out = out_ref(out)?;
        let cm = confusion(slice(y_true, n)?, slice(y_pred, n)?)?;
        let m = metrics(&cm)?;
        *out = ZdMetrics {
            tp: cm.tp,
            fp: cm.fp,
            fn_: cm.fn_,
            tn: cm.tn,
            accuracy: m.accuracy,
            recall: m.recall,
            precision: m.precision,
            f1: m.f1,
            fpr: m.fpr,
            undefined: u8::from(m.undefined.any()),
        };
        Ok(())
    })
}

/// Runs an experiment from a JSON config and returns metrics.csv as a string
/// (free with [`zd_string_free`]). With `out_dir` non-null every report file
/// is also written there.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, `out_dir` null or one, and
/// `metrics_out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn zd_run_experiment(
    config_json: *const c_char,
    out_dir: *const c_char,
    metrics_out: *mut *mut c_char,
) -> ZdStatus {
    guard(|| {
        let metrics_out = out_ref(metrics_out)?;
        let mut cfg = ExperimentConfig::from_json(str_arg(config_json)?)?;
        if !out_dir.is_null() {
            cfg.output_dir = Some(PathBuf::from(str_arg(out_dir)?));
        }
        let report = run_experiment(&cfg)?;
        if let Some(dir) = &cfg.output_dir {
            emit_reports(&report, dir)?;
        }
        let csv = String::from_utf8(metrics_csv(&report)?).map_err(|e| invalid(e.to_string()))?;
        *metrics_out = into_c_string(csv)?;
        Ok(())
    })
}
