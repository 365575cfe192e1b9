//! C ABI over the permbias core: opaque preference handles, plain status
//! codes, and value structs that map 1:1 onto C types.
//!
//! Conventions:
//!
//! * every fallible call returns a [`PwbStatus`]; outputs go through `out`
//!   pointers that are written only on `PWB_STATUS_OK`;
//! * permutations cross the boundary as arrays of 0-based `size_t` indices,
//!   rank 1 first;
//! * a human-readable message for the most recent failure on the calling
//!   thread is available via [`pwb_last_error_message`];
//! * handles from `pwb_preference_new*` must be released with
//!   [`pwb_preference_free`].
//!
//! The matching header is generated into `include/permbias.h` by cbindgen.

use permbias::calibration::{self, FitError, HuberConfig};
use permbias::lrtest::{self, TestConfig, TestError};
use permbias::model::{ModelError, Permutation, PreferenceVector};
use permbias::sampler::{sample_permutation, RngStream};
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range (count, replications, ...).
    InvalidArgument = 2,
    NonPositiveWeight = 3,
    DuplicateLabel = 4,
    TooFewObjects = 5,
    DimensionMismatch = 6,
    NotAPermutation = 7,
    TooLargeForExact = 8,
    DegenerateDesign = 9,
    TooFewPoints = 10,
    /// A label was not valid UTF-8.
    Utf8 = 11,
}

/// How a p-value in [`PwbTestResult`] was obtained.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PwbMethod {
    Exact = 0,
    MonteCarlo = 1,
}

/// Flat test outcome. `std_error` is NaN for the exact method. When
/// `surprisal_censored` is nonzero, `surprisal` holds the censored lower
/// bound `ln(replications / 3)` for a Monte Carlo estimate of zero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PwbTestResult {
    pub observed_loglik: f64,
    pub p_value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub surprisal: f64,
    pub replications: u64,
    pub tie_count: u64,
    pub method: PwbMethod,
    pub surprisal_censored: c_int,
}

/// Opaque preference-vector handle.
pub struct PwbPreference {
    inner: PreferenceVector,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: PwbStatus, message: &str) -> PwbStatus {
    set_error(message);
    status
}

fn model_error(e: &ModelError) -> PwbStatus {
    let status = match e {
        ModelError::NonPositiveWeight { .. } => PwbStatus::NonPositiveWeight,
        ModelError::DuplicateLabel { .. } => PwbStatus::DuplicateLabel,
        ModelError::TooFewObjects { .. } => PwbStatus::TooFewObjects,
        ModelError::DimensionMismatch { .. } => PwbStatus::DimensionMismatch,
        ModelError::NotAPermutation { .. } => PwbStatus::NotAPermutation,
    };
    fail(status, &e.to_string())
}

fn test_error(e: &TestError) -> PwbStatus {
    let status = match e {
        TestError::TooLargeForExact { .. } => PwbStatus::TooLargeForExact,
        TestError::NonPositiveP { .. } | TestError::InvalidConfig { .. } => {
            PwbStatus::InvalidArgument
        }
        TestError::Model(m) => return model_error(m),
    };
    fail(status, &e.to_string())
}

fn fit_error(e: &FitError) -> PwbStatus {
    let status = match e {
        FitError::TooFewPoints { .. } => PwbStatus::TooFewPoints,
        FitError::DegenerateDesign => PwbStatus::DegenerateDesign,
        FitError::InvalidObservation { .. } | FitError::NonFiniteSlope { .. } => {
            PwbStatus::InvalidArgument
        }
        FitError::Model(m) => return model_error(m),
    };
    fail(status, &e.to_string())
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn pwb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn slice_arg<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

/// Builds a preference vector from `len` weights; labels become "1", "2", ...
///
/// # Safety
/// `weights` must point to `len` readable doubles and `out` to a writable
/// pointer slot.
#[no_mangle]
pub unsafe extern "C" fn pwb_preference_new(
    weights: *const f64,
    len: usize,
    out: *mut *mut PwbPreference,
) -> PwbStatus {
    if out.is_null() {
        return fail(PwbStatus::NullPointer, "out is null");
    }
    let Some(weights) = slice_arg(weights, len) else {
        return fail(PwbStatus::NullPointer, "weights is null");
    };
    match PreferenceVector::from_weights(weights.to_vec()) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(PwbPreference { inner }));
            PwbStatus::Ok
        }
        Err(e) => model_error(&e),
    }
}

/// Builds a labelled preference vector.
///
/// # Safety
/// `labels` must point to `len` NUL-terminated strings, `weights` to `len`
/// doubles, `out` to a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn pwb_preference_new_labeled(
    labels: *const *const c_char,
    weights: *const f64,
    len: usize,
    out: *mut *mut PwbPreference,
) -> PwbStatus {
    if out.is_null() {
        return fail(PwbStatus::NullPointer, "out is null");
    }
    let (Some(labels), Some(weights)) = (slice_arg(labels, len), slice_arg(weights, len)) else {
        return fail(PwbStatus::NullPointer, "labels or weights is null");
    };
    let mut owned = Vec::with_capacity(len);
    for &label in labels {
        if label.is_null() {
            return fail(PwbStatus::NullPointer, "a label pointer is null");
        }
        match CStr::from_ptr(label).to_str() {
            Ok(s) => owned.push(s.to_owned()),
            Err(e) => return fail(PwbStatus::Utf8, &format!("label is not UTF-8: {e}")),
        }
    }
    match PreferenceVector::new(owned, weights.to_vec()) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(PwbPreference { inner }));
            PwbStatus::Ok
        }
        Err(e) => model_error(&e),
    }
}

/// Releases a handle from `pwb_preference_new*`. Null is a no-op.
///
/// # Safety
/// `pref` must be a pointer previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn pwb_preference_free(pref: *mut PwbPreference) {
    if !pref.is_null() {
        drop(Box::from_raw(pref));
    }
}

/// Number of objects in the preference vector; 0 for a null handle.
///
/// # Safety
/// `pref` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pwb_preference_len(pref: *const PwbPreference) -> usize {
    pref.as_ref().map_or(0, |p| p.inner.len())
}

unsafe fn permutation_arg(
    pref: &PwbPreference,
    order: *const usize,
    len: usize,
) -> Result<Permutation, PwbStatus> {
    let Some(order) = slice_arg(order, len) else {
        return Err(fail(PwbStatus::NullPointer, "order is null"));
    };
    if len != pref.inner.len() {
        return Err(fail(
            PwbStatus::DimensionMismatch,
            &format!(
                "DimensionMismatch: preference vector has {} objects but permutation has {len}",
                pref.inner.len()
            ),
        ));
    }
    Permutation::new(order.to_vec()).map_err(|e| model_error(&e))
}

/// Reduced log-likelihood of a ranking (nats).
///
/// # Safety
/// `pref` must be a live handle, `order` must point to `len` indices, `out`
/// to a writable double.
#[no_mangle]
pub unsafe extern "C" fn pwb_log_likelihood(
    pref: *const PwbPreference,
    order: *const usize,
    len: usize,
    out: *mut f64,
) -> PwbStatus {
    let (Some(pref), false) = (pref.as_ref(), out.is_null()) else {
        return fail(PwbStatus::NullPointer, "pref or out is null");
    };
    let perm = match permutation_arg(pref, order, len) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match pref.inner.log_likelihood(&perm) {
        Ok(v) => {
            *out = v;
            PwbStatus::Ok
        }
        Err(e) => model_error(&e),
    }
}

/// Likelihood of a ranking, in `(0, 1]`.
///
/// # Safety
/// Same contract as [`pwb_log_likelihood`].
#[no_mangle]
pub unsafe extern "C" fn pwb_likelihood(
    pref: *const PwbPreference,
    order: *const usize,
    len: usize,
    out: *mut f64,
) -> PwbStatus {
    let (Some(pref), false) = (pref.as_ref(), out.is_null()) else {
        return fail(PwbStatus::NullPointer, "pref or out is null");
    };
    let perm = match permutation_arg(pref, order, len) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match pref.inner.likelihood(&perm) {
        Ok(v) => {
            *out = v;
            PwbStatus::Ok
        }
        Err(e) => model_error(&e),
    }
}

/// Draws one ranking from stream `(master_seed, stream_index)` and writes the
/// object indices, rank 1 first, into `out_order`.
///
/// # Safety
/// `pref` must be a live handle and `out_order` must have room for
/// `pwb_preference_len(pref)` indices.
#[no_mangle]
pub unsafe extern "C" fn pwb_sample_permutation(
    pref: *const PwbPreference,
    master_seed: u64,
    stream_index: u64,
    out_order: *mut usize,
) -> PwbStatus {
    let (Some(pref), false) = (pref.as_ref(), out_order.is_null()) else {
        return fail(PwbStatus::NullPointer, "pref or out_order is null");
    };
    let perm = sample_permutation(&pref.inner, &RngStream::new(master_seed, stream_index));
    std::ptr::copy_nonoverlapping(perm.order().as_ptr(), out_order, perm.len());
    PwbStatus::Ok
}

fn convert_result(r: &lrtest::TestResult) -> PwbTestResult {
    PwbTestResult {
        observed_loglik: r.observed_ell,
        p_value: r.p_value,
        std_error: r.std_error.unwrap_or(f64::NAN),
        ci_low: r.ci95.0,
        ci_high: r.ci95.1,
        surprisal: r.surprisal,
        replications: r.replications_used,
        tie_count: r.tie_count,
        method: match r.method {
            lrtest::Method::Exact => PwbMethod::Exact,
            lrtest::Method::MonteCarlo => PwbMethod::MonteCarlo,
        },
        surprisal_censored: c_int::from(r.surprisal_censored),
    }
}

/// Exact p-value by enumerating all n! rankings; `exact_max_n` caps `n`
/// (hard limit 12).
///
/// # Safety
/// `pref` must be a live handle, `order` must point to `len` indices, `out`
/// to a writable result struct.
#[no_mangle]
pub unsafe extern "C" fn pwb_exact_pvalue(
    pref: *const PwbPreference,
    order: *const usize,
    len: usize,
    exact_max_n: usize,
    out: *mut PwbTestResult,
) -> PwbStatus {
    let (Some(pref), false) = (pref.as_ref(), out.is_null()) else {
        return fail(PwbStatus::NullPointer, "pref or out is null");
    };
    let perm = match permutation_arg(pref, order, len) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match lrtest::exact_pvalue_with_max_n(&pref.inner, &perm, exact_max_n) {
        Ok(r) => {
            *out = convert_result(&r);
            PwbStatus::Ok
        }
        Err(e) => test_error(&e),
    }
}

/// Monte Carlo p-value from `replications` draws seeded by `master_seed`.
/// Deterministic for fixed inputs, independent of thread count.
///
/// # Safety
/// Same contract as [`pwb_exact_pvalue`].
#[no_mangle]
pub unsafe extern "C" fn pwb_mc_pvalue(
    pref: *const PwbPreference,
    order: *const usize,
    len: usize,
    replications: u64,
    master_seed: u64,
    out: *mut PwbTestResult,
) -> PwbStatus {
    let (Some(pref), false) = (pref.as_ref(), out.is_null()) else {
        return fail(PwbStatus::NullPointer, "pref or out is null");
    };
    let perm = match permutation_arg(pref, order, len) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let cfg = TestConfig {
        replications,
        master_seed,
        ..TestConfig::default()
    };
    match lrtest::mc_pvalue(&pref.inner, &perm, &cfg) {
        Ok(r) => {
            *out = convert_result(&r);
            PwbStatus::Ok
        }
        Err(e) => test_error(&e),
    }
}

/// Self-information `-ln p` in nats; requires `p > 0`.
///
/// # Safety
/// `out` must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn pwb_surprisal(p_value: f64, out: *mut f64) -> PwbStatus {
    if out.is_null() {
        return fail(PwbStatus::NullPointer, "out is null");
    }
    match lrtest::surprisal(p_value) {
        Ok(v) => {
            *out = v;
            PwbStatus::Ok
        }
        Err(e) => test_error(&e),
    }
}

/// Fits `ln(win_probability) = slope * elo + intercept`. With
/// `huber != 0` the robust Huber M-estimator (IRLS) is used, otherwise
/// ordinary least squares. `out_converged` receives 1 when the iteration
/// converged (always 1 for OLS).
///
/// # Safety
/// `elo` and `win_probability` must point to `len` doubles; the three `out_*`
/// pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn pwb_fit_elo_line(
    elo: *const f64,
    win_probability: *const f64,
    len: usize,
    huber: c_int,
    out_slope: *mut f64,
    out_intercept: *mut f64,
    out_converged: *mut c_int,
) -> PwbStatus {
    if out_slope.is_null() || out_intercept.is_null() || out_converged.is_null() {
        return fail(PwbStatus::NullPointer, "an out pointer is null");
    }
    let (Some(elo), Some(p)) = (slice_arg(elo, len), slice_arg(win_probability, len)) else {
        return fail(PwbStatus::NullPointer, "elo or win_probability is null");
    };
    let data: Vec<calibration::EloObservation> = elo
        .iter()
        .zip(p)
        .enumerate()
        .map(|(i, (&elo, &wp))| calibration::EloObservation {
            team: (i + 1).to_string(),
            elo,
            win_probability: wp,
        })
        .collect();
    let fit = if huber != 0 {
        calibration::fit_huber_with(&data, &HuberConfig::default())
    } else {
        calibration::fit_ols(&data)
    };
    match fit {
        Ok(fit) => {
            *out_slope = fit.slope;
            *out_intercept = fit.intercept;
            *out_converged = c_int::from(fit.converged);
            PwbStatus::Ok
        }
        Err(e) => fit_error(&e),
    }
}

/// Converts Elo ratings into a preference handle using a fitted slope:
/// `w_i = exp(slope * (elo_i - mean elo))`; labels become "1", "2", ...
///
/// # Safety
/// `elo` must point to `len` doubles and `out` to a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn pwb_elo_to_preference(
    slope: f64,
    elo: *const f64,
    len: usize,
    out: *mut *mut PwbPreference,
) -> PwbStatus {
    if out.is_null() {
        return fail(PwbStatus::NullPointer, "out is null");
    }
    let Some(elo) = slice_arg(elo, len) else {
        return fail(PwbStatus::NullPointer, "elo is null");
    };
    if !slope.is_finite() {
        return fail(
            PwbStatus::InvalidArgument,
            &format!("NonFiniteSlope: fit slope is {slope}"),
        );
    }
    let fit = calibration::LinearFit {
        slope,
        intercept: 0.0,
        method: calibration::FitMethod::Huber,
        iterations: 0,
        converged: true,
        robust_weights: Vec::new(),
        r_squared: f64::NAN,
    };
    let labelled: Vec<(String, f64)> = elo
        .iter()
        .enumerate()
        .map(|(i, &e)| ((i + 1).to_string(), e))
        .collect();
    match calibration::elo_to_preferences(&fit, &labelled) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(PwbPreference { inner }));
            PwbStatus::Ok
        }
        Err(e) => fit_error(&e),
    }
}
