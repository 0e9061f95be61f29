//! C ABI over craft-core: opaque handles, integer status codes, and a
//! per-thread last-error message. The header is generated into include/
//! by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use craft_core::engine::ClusteringResult;
use craft_core::model::{Dataset, Hyperparams};
use craft_core::{craft_fit, CraftError};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CraftStatus {
    CraftOk = 0,
    CraftErrInvalidArg = 1,
    CraftErrData = 2,
    CraftErrConfig = 3,
    CraftErrIo = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes stripped");
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &CraftError) -> CraftStatus {
    match err {
        CraftError::Io { .. } | CraftError::Csv { .. } | CraftError::Json { .. } => {
            CraftStatus::CraftErrIo
        }
        CraftError::ConfigInvalid(_)
        | CraftError::RhoOutOfRange { .. }
        | CraftError::KTooLarge { .. } => CraftStatus::CraftErrConfig,
        _ => CraftStatus::CraftErrData,
    }
}

/// Message for the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn craft_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Opaque dataset handle.
pub struct CraftDataset {
    inner: Dataset,
}

/// Opaque fit-result handle.
pub struct CraftResult {
    inner: ClusteringResult,
}

/// Load a CSV + schema JSON pair into a dataset handle. On success writes
/// the handle to `out` and returns CraftOk; the handle must be released with
/// craft_dataset_free.
///
/// # Safety
/// `data_path` and `schema_path` must be valid NUL-terminated strings and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn craft_dataset_load(
    data_path: *const c_char,
    schema_path: *const c_char,
    out: *mut *mut CraftDataset,
) -> CraftStatus {
    if data_path.is_null() || schema_path.is_null() || out.is_null() {
        set_error("null pointer argument");
        return CraftStatus::CraftErrInvalidArg;
    }
    let parse = |p: *const c_char| CStr::from_ptr(p).to_str().map(Path::new);
    let (Ok(data_path), Ok(schema_path)) = (parse(data_path), parse(schema_path)) else {
        set_error("path is not valid UTF-8");
        return CraftStatus::CraftErrInvalidArg;
    };
    match craft_core::io::load_dataset(data_path, schema_path) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(CraftDataset { inner }));
            CraftStatus::CraftOk
        }
        Err(e) => {
            set_error(&e.to_string());
            *out = ptr::null_mut();
            status_of(&e)
        }
    }
}

/// # Safety
/// `handle` must come from craft_dataset_load and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn craft_dataset_free(handle: *mut CraftDataset) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of rows, or 0 if the handle is null.
///
/// # Safety
/// `handle` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn craft_dataset_rows(handle: *const CraftDataset) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.n())
}

/// Number of feature columns, or 0 if the handle is null.
///
/// # Safety
/// `handle` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn craft_dataset_features(handle: *const CraftDataset) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.d())
}

/// Run the fixed-budget fit with default smoothing and iteration settings.
/// On success writes a result handle to `out`; release it with
/// craft_result_free.
///
/// # Safety
/// `dataset` must be a live dataset handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn craft_fit_fixed(
    dataset: *const CraftDataset,
    lambda: f64,
    m: f64,
    seed: u64,
    out: *mut *mut CraftResult,
) -> CraftStatus {
    if dataset.is_null() || out.is_null() {
        set_error("null pointer argument");
        return CraftStatus::CraftErrInvalidArg;
    }
    let mut hp = Hyperparams::new(lambda, m);
    hp.seed = seed;
    if let Err(e) = hp.validate() {
        set_error(&e.to_string());
        return CraftStatus::CraftErrConfig;
    }
    match craft_fit(&(*dataset).inner, &hp) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(CraftResult { inner }));
            CraftStatus::CraftOk
        }
        Err(e) => {
            set_error(&e.to_string());
            *out = ptr::null_mut();
            status_of(&e)
        }
    }
}

/// # Safety
/// `handle` must come from craft_fit_fixed and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn craft_result_free(handle: *mut CraftResult) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of clusters found, or 0 if the handle is null.
///
/// # Safety
/// `handle` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn craft_result_k(handle: *const CraftResult) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.state.k_plus)
}

/// Final objective value, or NaN if the handle is null.
///
/// # Safety
/// `handle` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn craft_result_objective(handle: *const CraftResult) -> f64 {
    handle.as_ref().map_or(f64::NAN, |h| h.inner.objective)
}

/// Passes executed, or 0 if the handle is null.
///
/// # Safety
/// `handle` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn craft_result_iterations(handle: *const CraftResult) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.iterations)
}

/// 1 if the fit converged before the iteration cap, else 0.
///
/// # Safety
/// `handle` must be a live result handle or null.
#[no_mangle]
pub unsafe extern "C" fn craft_result_converged(handle: *const CraftResult) -> i32 {
    handle.as_ref().map_or(0, |h| i32::from(h.inner.converged))
}

/// Copy the per-row cluster assignments into `buf` (capacity `len`, must be
/// at least the row count).
///
/// # Safety
/// `handle` must be a live result handle; `buf` must point to `len` usizes.
#[no_mangle]
pub unsafe extern "C" fn craft_result_assignments(
    handle: *const CraftResult,
    buf: *mut usize,
    len: usize,
) -> CraftStatus {
    let Some(h) = handle.as_ref() else {
        set_error("null result handle");
        return CraftStatus::CraftErrInvalidArg;
    };
    let z = &h.inner.state.z;
    if buf.is_null() || len < z.len() {
        set_error("assignment buffer too small");
        return CraftStatus::CraftErrInvalidArg;
    }
    ptr::copy_nonoverlapping(z.as_ptr(), buf, z.len());
    CraftStatus::CraftOk
}

/// Copy cluster `k`'s feature mask into `buf` as 0/1 bytes (capacity `len`,
/// must be at least the feature count).
///
/// # Safety
/// `handle` must be a live result handle; `buf` must point to `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn craft_result_mask(
    handle: *const CraftResult,
    k: usize,
    buf: *mut u8,
    len: usize,
) -> CraftStatus {
    let Some(h) = handle.as_ref() else {
        set_error("null result handle");
        return CraftStatus::CraftErrInvalidArg;
    };
    let Some(mask) = h.inner.state.masks.get(k) else {
        set_error("cluster index out of range");
        return CraftStatus::CraftErrInvalidArg;
    };
    if buf.is_null() || len < mask.len() {
        set_error("mask buffer too small");
        return CraftStatus::CraftErrInvalidArg;
    }
    for (i, &b) in mask.iter().enumerate() {
        *buf.add(i) = u8::from(b);
    }
    CraftStatus::CraftOk
}

#[cfg(test)]
mod tests {
    use super::*;
    use craft_core::io::emit;
    use craft_core::synth::{config_a, gen_categorical};
    use std::ffi::CString;

    #[test]
    fn load_fit_query_free() {
        let (data, _, _) = gen_categorical(&config_a(1)).unwrap();
        let dir = tempfile::TempDir::new().unwrap();
        let csv = dir.path().join("d.csv");
        let schema = dir.path().join("s.json");
        emit(&data, &csv, &schema).unwrap();

        let csv_c = CString::new(csv.to_str().unwrap()).unwrap();
        let schema_c = CString::new(schema.to_str().unwrap()).unwrap();
        unsafe {
            let mut ds: *mut CraftDataset = ptr::null_mut();
            assert_eq!(
                craft_dataset_load(csv_c.as_ptr(), schema_c.as_ptr(), &mut ds),
                CraftStatus::CraftOk
            );
            assert_eq!(craft_dataset_rows(ds), 300);
            assert_eq!(craft_dataset_features(ds), 24);

            let mut res: *mut CraftResult = ptr::null_mut();
            assert_eq!(
                craft_fit_fixed(ds, 10.0, 1.0 / 3.0, 0, &mut res),
                CraftStatus::CraftOk
            );
            let k = craft_result_k(res);
            assert!(k >= 1);
            let mut z = vec![0usize; 300];
            assert_eq!(
                craft_result_assignments(res, z.as_mut_ptr(), z.len()),
                CraftStatus::CraftOk
            );
            assert!(z.iter().all(|&c| c < k));
            let mut mask = vec![0u8; 24];
            assert_eq!(
                craft_result_mask(res, 0, mask.as_mut_ptr(), mask.len()),
                CraftStatus::CraftOk
            );
            assert!(mask.iter().all(|&b| b <= 1));
            assert!(craft_result_objective(res).is_finite());

            craft_result_free(res);
            craft_dataset_free(ds);
        }
    }

    #[test]
    fn errors_set_message_and_status() {
        let missing = CString::new("/nonexistent/x.csv").unwrap();
        unsafe {
            let mut ds: *mut CraftDataset = ptr::null_mut();
            let st = craft_dataset_load(missing.as_ptr(), missing.as_ptr(), &mut ds);
            assert_eq!(st, CraftStatus::CraftErrIo);
            assert!(ds.is_null());
            let msg = CStr::from_ptr(craft_last_error()).to_str().unwrap();
            assert!(msg.contains("x.csv"));

            // invalid hyperparameters
            let (data, _, _) = gen_categorical(&config_a(0)).unwrap();
            let handle = Box::into_raw(Box::new(CraftDataset { inner: data }));
            let mut res: *mut CraftResult = ptr::null_mut();
            assert_eq!(
                craft_fit_fixed(handle, -1.0, 0.5, 0, &mut res),
                CraftStatus::CraftErrConfig
            );
            assert_eq!(
                craft_fit_fixed(handle, 1.0, 1.5, 0, &mut res),
                CraftStatus::CraftErrConfig
            );
            craft_dataset_free(handle);
        }
    }
}
