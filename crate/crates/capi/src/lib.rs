//! C ABI for the poolside active learning toolkit.
//!
//! The surface follows the usual C conventions: opaque handles behind
//! pointers, integer status codes, explicit free functions, and a
//! thread-local last-error message. Strings returned as `char*` are owned
//! by the caller and must be released with [`poolside_string_free`];
//! `poolside_version` and `poolside_last_error` return borrowed pointers
//! that must not be freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use poolside::benchmark::{run_experiment, write_results, ExperimentOutcome, ExperimentSpec};
use poolside::informativeness::{
    bald_regression, entropy, expected_improvement, greedy_score, least_confidence_classification,
    least_confidence_regression, margin_confidence, ratio_confidence, ucb,
};
use poolside::nalgebra::DMatrix;
use poolside::{ClassPosterior, RegressionPosterior};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolsideStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The experiment spec failed to parse or validate.
    InvalidSpec = 3,
    /// A numeric argument was out of range (sizes, probabilities).
    InvalidArgument = 4,
    /// The experiment or serialization failed at runtime.
    RuntimeError = 5,
}

/// Classification score selector for [`poolside_score_classification`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolsideClassMeasure {
    Entropy = 0,
    LeastConfidence = 1,
    MarginConfidence = 2,
    RatioConfidence = 3,
}

/// Regression score selector for [`poolside_score_regression`]. `Ucb` reads
/// its trade-off lambda and `ExpectedImprovement` the best observed target
/// from the `param` argument; the other measures ignore it.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolsideRegressionMeasure {
    LeastConfidence = 0,
    GreedyScore = 1,
    Ucb = 2,
    ExpectedImprovement = 3,
    Bald = 4,
}

/// Opaque handle to a finished experiment sweep.
pub struct PoolsideExperiment {
    outcome: ExperimentOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<Vec<u8>>) {
    let message = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn poolside_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the last error on this thread, or null if the last call
/// succeeded. Borrowed pointer, valid until the next failing call on the
/// same thread; do not free.
#[no_mangle]
pub extern "C" fn poolside_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `poolside_*` function
/// that documents string ownership, or null.
#[no_mangle]
pub unsafe extern "C" fn poolside_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs an experiment from a JSON spec string.
///
/// `seed_override` may be null; when set it replaces the spec's master
/// seed. On success `*out` owns the experiment handle, to be released with
/// [`poolside_experiment_free`].
///
/// # Safety
/// `spec_json` must be a valid NUL-terminated string and `out` a valid
/// pointer; `seed_override` is either null or a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn poolside_experiment_run(
    spec_json: *const c_char,
    seed_override: *const u64,
    out: *mut *mut PoolsideExperiment,
) -> PoolsideStatus {
    if spec_json.is_null() || out.is_null() {
        set_last_error("spec_json and out must be non-null");
        return PoolsideStatus::NullArgument;
    }
    let Ok(text) = CStr::from_ptr(spec_json).to_str() else {
        set_last_error("spec_json is not valid UTF-8");
        return PoolsideStatus::InvalidUtf8;
    };
    let mut spec: ExperimentSpec = match serde_json::from_str(text) {
        Ok(spec) => spec,
        Err(e) => {
            set_last_error(format!("malformed spec: {e}"));
            return PoolsideStatus::InvalidSpec;
        }
    };
    if !seed_override.is_null() {
        spec.master_seed = *seed_override;
    }
    if let Err(e) = spec.validate() {
        set_last_error(e.to_string());
        return PoolsideStatus::InvalidSpec;
    }
    match run_experiment(&spec) {
        Ok(outcome) => {
            clear_last_error();
            *out = Box::into_raw(Box::new(PoolsideExperiment { outcome }));
            PoolsideStatus::Ok
        }
        Err(e) => {
            set_last_error(e.to_string());
            PoolsideStatus::RuntimeError
        }
    }
}

/// Releases an experiment handle.
///
/// # Safety
/// `exp` must come from [`poolside_experiment_run`] or be null.
#[no_mangle]
pub unsafe extern "C" fn poolside_experiment_free(exp: *mut PoolsideExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}

/// Number of strategy entries in the sweep.
///
/// # Safety
/// `exp` must be a valid experiment handle.
#[no_mangle]
pub unsafe extern "C" fn poolside_experiment_strategy_count(
    exp: *const PoolsideExperiment,
) -> usize {
    if exp.is_null() {
        return 0;
    }
    (*exp).outcome.summary.strategies.len()
}

/// Mean and standard deviation of a strategy's IPAUC over folds.
///
/// # Safety
/// `exp` must be a valid experiment handle; `mean_out` and `std_out` must
/// be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn poolside_experiment_ipauc(
    exp: *const PoolsideExperiment,
    strategy_index: usize,
    mean_out: *mut f64,
    std_out: *mut f64,
) -> PoolsideStatus {
    if exp.is_null() || mean_out.is_null() || std_out.is_null() {
        set_last_error("null argument");
        return PoolsideStatus::NullArgument;
    }
    let strategies = &(*exp).outcome.summary.strategies;
    let Some(entry) = strategies.get(strategy_index) else {
        set_last_error(format!(
            "strategy index {strategy_index} out of range for {}",
            strategies.len()
        ));
        return PoolsideStatus::InvalidArgument;
    };
    *mean_out = entry.mean_ipauc;
    *std_out = entry.std_ipauc;
    clear_last_error();
    PoolsideStatus::Ok
}

fn string_to_c(text: String) -> *mut c_char {
    match CString::new(text) {
        Ok(owned) => owned.into_raw(),
        Err(_) => {
            set_last_error("output contained an interior NUL byte");
            ptr::null_mut()
        }
    }
}

/// Name of a strategy entry; caller frees with [`poolside_string_free`].
/// Returns null on a bad index.
///
/// # Safety
/// `exp` must be a valid experiment handle.
#[no_mangle]
pub unsafe extern "C" fn poolside_experiment_strategy_name(
    exp: *const PoolsideExperiment,
    strategy_index: usize,
) -> *mut c_char {
    if exp.is_null() {
        return ptr::null_mut();
    }
    let strategies = &(*exp).outcome.summary.strategies;
    match strategies.get(strategy_index) {
        Some(entry) => string_to_c(entry.strategy.clone()),
        None => ptr::null_mut(),
    }
}

/// The `summary.csv` content; caller frees with [`poolside_string_free`].
///
/// # Safety
/// `exp` must be a valid experiment handle.
#[no_mangle]
pub unsafe extern "C" fn poolside_experiment_summary_csv(
    exp: *const PoolsideExperiment,
) -> *mut c_char {
    if exp.is_null() {
        return ptr::null_mut();
    }
    let strategies = &(*exp).outcome.summary.strategies;
    let mut text = String::from("strategy,mean_ipauc,std_ipauc\n");
    for s in strategies {
        text.push_str(&format!(
            "{},{:.6},{:.6}\n",
            s.strategy, s.mean_ipauc, s.std_ipauc
        ));
    }
    string_to_c(text)
}

/// Writes `summary.csv`, `runs.jsonl`, and `spec.json` into `out_dir`.
///
/// # Safety
/// `exp` must be a valid experiment handle and `out_dir` a valid
/// NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn poolside_experiment_write(
    exp: *const PoolsideExperiment,
    out_dir: *const c_char,
) -> PoolsideStatus {
    if exp.is_null() || out_dir.is_null() {
        set_last_error("null argument");
        return PoolsideStatus::NullArgument;
    }
    let Ok(dir) = CStr::from_ptr(out_dir).to_str() else {
        set_last_error("out_dir is not valid UTF-8");
        return PoolsideStatus::InvalidUtf8;
    };
    match write_results(&(*exp).outcome, dir) {
        Ok(_) => {
            clear_last_error();
            PoolsideStatus::Ok
        }
        Err(e) => {
            set_last_error(e.to_string());
            PoolsideStatus::RuntimeError
        }
    }
}

/// Scores a row-major `n_points x n_classes` probability matrix with a
/// classification measure, writing `n_points` scores to `out_scores`.
///
/// # Safety
/// `probs` must point to `n_points * n_classes` doubles and `out_scores`
/// to `n_points` doubles.
#[no_mangle]
pub unsafe extern "C" fn poolside_score_classification(
    measure: PoolsideClassMeasure,
    probs: *const f64,
    n_points: usize,
    n_classes: usize,
    out_scores: *mut f64,
) -> PoolsideStatus {
    if probs.is_null() || out_scores.is_null() {
        set_last_error("null argument");
        return PoolsideStatus::NullArgument;
    }
    if n_points == 0 || n_classes == 0 {
        set_last_error("n_points and n_classes must be positive");
        return PoolsideStatus::InvalidArgument;
    }
    let raw = std::slice::from_raw_parts(probs, n_points * n_classes);
    if !raw.iter().all(|p| p.is_finite() && *p >= 0.0) {
        set_last_error("probabilities must be finite and non-negative");
        return PoolsideStatus::InvalidArgument;
    }
    let posterior = ClassPosterior {
        probs: DMatrix::from_fn(n_points, n_classes, |i, j| raw[i * n_classes + j]),
        members: None,
    };
    let scores = match measure {
        PoolsideClassMeasure::Entropy => entropy(&posterior),
        PoolsideClassMeasure::LeastConfidence => least_confidence_classification(&posterior),
        PoolsideClassMeasure::MarginConfidence => match margin_confidence(&posterior) {
            Ok(scores) => scores,
            Err(e) => {
                set_last_error(e.to_string());
                return PoolsideStatus::InvalidArgument;
            }
        },
        PoolsideClassMeasure::RatioConfidence => match ratio_confidence(&posterior) {
            Ok(scores) => scores,
            Err(e) => {
                set_last_error(e.to_string());
                return PoolsideStatus::InvalidArgument;
            }
        },
    };
    let out = std::slice::from_raw_parts_mut(out_scores, n_points);
    out.copy_from_slice(scores.scores());
    clear_last_error();
    PoolsideStatus::Ok
}

/// Scores `n_points` Gaussian predictive marginals with a regression
/// measure. `param` is the UCB lambda or the expected-improvement
/// reference, depending on the measure.
///
/// # Safety
/// `mean`, `variance`, and `out_scores` must each point to `n_points`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn poolside_score_regression(
    measure: PoolsideRegressionMeasure,
    mean: *const f64,
    variance: *const f64,
    n_points: usize,
    param: f64,
    out_scores: *mut f64,
) -> PoolsideStatus {
    if mean.is_null() || variance.is_null() || out_scores.is_null() {
        set_last_error("null argument");
        return PoolsideStatus::NullArgument;
    }
    if n_points == 0 {
        set_last_error("n_points must be positive");
        return PoolsideStatus::InvalidArgument;
    }
    let mean = std::slice::from_raw_parts(mean, n_points);
    let variance = std::slice::from_raw_parts(variance, n_points);
    if !mean.iter().chain(variance).all(|v| v.is_finite()) || variance.iter().any(|v| *v < 0.0) {
        set_last_error("means must be finite and variances finite and non-negative");
        return PoolsideStatus::InvalidArgument;
    }
    let posterior = RegressionPosterior {
        mean: mean.to_vec(),
        variance: variance.to_vec(),
        members: None,
    };
    let scores = match measure {
        PoolsideRegressionMeasure::LeastConfidence => least_confidence_regression(&posterior),
        PoolsideRegressionMeasure::GreedyScore => greedy_score(&posterior),
        PoolsideRegressionMeasure::Ucb => ucb(&posterior, param),
        PoolsideRegressionMeasure::ExpectedImprovement => expected_improvement(&posterior, param),
        PoolsideRegressionMeasure::Bald => bald_regression(&posterior),
    };
    let out = std::slice::from_raw_parts_mut(out_scores, n_points);
    out.copy_from_slice(scores.scores());
    clear_last_error();
    PoolsideStatus::Ok
}
