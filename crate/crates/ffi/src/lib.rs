//! C ABI over the `tiltflow` core.
//!
//! Objects cross the boundary as opaque handles created by `tf_*_new`-style
//! constructors and released with the matching `tf_*_free`. Every fallible
//! call returns a [`TfStatus`]; on failure the message is kept per thread and
//! can be read with [`tf_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tiltflow::flow::{simulate_paths, PathResult, Scheme, SimConfig, StopReason};
use tiltflow::verify::{summarize, EnsembleSummary};
use tiltflow::{solve_c, Error, Measure, TiltFamily, TiltParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The measure spec could not be parsed or violates its invariants.
    InvalidMeasure = 3,
    /// Simulation options or an index are out of range.
    InvalidArgument = 4,
    /// The tilt is not integrable, or the target lies outside the hull.
    InvalidTilt = 5,
    /// A root solve or quadrature did not converge.
    Numerical = 6,
    /// Every path of an ensemble failed.
    AllPathsFailed = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Tilted functionals at one `(b, c)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TfMoments {
    pub v: f64,
    pub log_v: f64,
    pub a: f64,
    pub var: f64,
    pub m3: f64,
}

/// Scheme selector for [`TfSimOptions`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfScheme {
    /// `W` simulated directly, `c` recovered by root finding.
    RootDriven = 0,
    /// Euler–Maruyama on `(b, c)`.
    Euler = 1,
}

/// Ensemble options; fill with [`tf_sim_options_default`] and override.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TfSimOptions {
    pub dt_max: f64,
    pub eta: f64,
    pub eps_a: f64,
    pub t_max: f64,
    pub seed: u64,
    pub scheme: TfScheme,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfStopReason {
    AVarBelowEps = 0,
    HullEndpoint = 1,
    TimeLimit = 2,
    Breakdown = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TfPath {
    pub path_id: u64,
    pub t_hat: f64,
    pub w_t: f64,
    pub n_steps: u64,
    pub stop_reason: TfStopReason,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TfSummary {
    pub n: usize,
    pub n_failed: usize,
    pub mean_t: f64,
    pub se_t: f64,
    pub max_t: f64,
    pub ks_stat: f64,
    pub ks_p: f64,
}

/// Opaque measure handle.
pub struct TfMeasure(Measure);

/// Opaque handle to the paths and summary of one ensemble run.
pub struct TfEnsemble {
    paths: Vec<PathResult>,
    summary: EnsembleSummary,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut bytes = msg.into().into_bytes();
    bytes.retain(|b| *b != 0);
    let c = CString::new(bytes).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TfStatus {
    match e {
        Error::NotCentered { .. }
        | Error::MassNotOne { .. }
        | Error::InfiniteVariance
        | Error::MalformedSpec(_)
        | Error::Json(_) => TfStatus::InvalidMeasure,
        Error::TiltNotIntegrable { .. } | Error::TargetOutsideHull { .. } | Error::DegenerateTilt { .. } => {
            TfStatus::InvalidTilt
        }
        Error::QuadratureFailure { .. } | Error::NoConvergence { .. } => TfStatus::Numerical,
        Error::AllPathsFailed { .. } => TfStatus::AllPathsFailed,
        _ => TfStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (TfStatus, String)>) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TfStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside tiltflow");
            TfStatus::Panic
        }
    }
}

fn lift(e: Error) -> (TfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (TfStatus, String) {
    (TfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (TfStatus, String)> {
    // SAFETY: the caller guarantees `p` is null or valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), (TfStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, by contract, valid for writes.
    unsafe { p.write(v) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or "" after a success.
/// The pointer stays valid until the next call into the library on the
/// same thread.
#[no_mangle]
pub extern "C" fn tf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse a JSON measure spec, e.g. `{"type": "uniform", "lo": -1, "hi": 1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_measure_from_json(json: *const c_char, out: *mut *mut TfMeasure) -> TfStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        // SAFETY: non-null, NUL-terminated by contract.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|e| (TfStatus::InvalidUtf8, e.to_string()))?;
        let mu = Measure::from_json(text).map_err(lift)?;
        unsafe { write(out, Box::into_raw(Box::new(TfMeasure(mu))), "out") }
    })
}

/// Release a measure. Null is ignored.
///
/// # Safety
/// `m` must come from [`tf_measure_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tf_measure_free(m: *mut TfMeasure) {
    if !m.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Variance of the measure, or NaN for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_measure_variance(m: *const TfMeasure) -> f64 {
    unsafe { m.as_ref() }.map_or(f64::NAN, |m| m.0.variance())
}

/// `V`, `log V`, `a`, `A` and `m3` of the measure tilted by `(b, c)`.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_tilted_moments(m: *const TfMeasure, b: f64, c: f64, out: *mut TfMoments) -> TfStatus {
    guard(|| {
        let mu = unsafe { deref(m, "measure") }?;
        let p = TiltParams::new(b, c).map_err(lift)?;
        let t = mu.0.tilted_moments(p).map_err(lift)?;
        let res = TfMoments { v: t.v(), log_v: t.log_v, a: t.a, var: t.var, m3: t.m3 };
        unsafe { write(out, res, "out") }
    })
}

/// The `c` at which the `b`-tilt of the measure has mean `a`.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_solve_c(m: *const TfMeasure, a: f64, b: f64, out: *mut f64) -> TfStatus {
    guard(|| {
        let mu = unsafe { deref(m, "measure") }?;
        let c = solve_c(&mu.0, a, b).map_err(lift)?;
        unsafe { write(out, c, "out") }
    })
}

/// Default options for the measure (`dt_max = 1e-3`, `eta = 0.05`,
/// `eps_a = 1e-6·Var`, `t_max = 50·Var`, seed 0, root-driven scheme).
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_sim_options_default(m: *const TfMeasure, out: *mut TfSimOptions) -> TfStatus {
    guard(|| {
        let mu = unsafe { deref(m, "measure") }?;
        let c = SimConfig::for_measure(&mu.0).map_err(lift)?;
        let o = TfSimOptions {
            dt_max: c.dt_max,
            eta: c.eta,
            eps_a: c.eps_a,
            t_max: c.t_max,
            seed: c.seed,
            scheme: TfScheme::RootDriven,
        };
        unsafe { write(out, o, "out") }
    })
}

/// Simulate paths `0..n_paths` and summarize them.
///
/// # Safety
/// `m` and `opts` must be valid; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_run_ensemble(
    m: *const TfMeasure,
    opts: *const TfSimOptions,
    n_paths: usize,
    out: *mut *mut TfEnsemble,
) -> TfStatus {
    guard(|| {
        let mu = unsafe { deref(m, "measure") }?;
        let o = unsafe { deref(opts, "opts") }?;
        if n_paths == 0 {
            return Err((TfStatus::InvalidArgument, "n_paths must be at least 1".into()));
        }
        let cfg = SimConfig {
            dt_max: o.dt_max,
            eta: o.eta,
            eps_a: o.eps_a,
            t_max: o.t_max,
            seed: o.seed,
            scheme: match o.scheme {
                TfScheme::RootDriven => Scheme::RootDriven,
                TfScheme::Euler => Scheme::Euler,
            },
            ..SimConfig::for_measure(&mu.0).map_err(lift)?
        };
        let paths = simulate_paths(&mu.0, &cfg, 0..n_paths as u64).map_err(lift)?;
        let summary = summarize(&mu.0, &paths).map_err(lift)?;
        unsafe { write(out, Box::into_raw(Box::new(TfEnsemble { paths, summary })), "out") }
    })
}

/// Number of paths in the ensemble, or 0 for a null handle.
///
/// # Safety
/// `e` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_ensemble_len(e: *const TfEnsemble) -> usize {
    unsafe { e.as_ref() }.map_or(0, |e| e.paths.len())
}

/// Per-path outcome `i`.
///
/// # Safety
/// `e` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_ensemble_path(e: *const TfEnsemble, i: usize, out: *mut TfPath) -> TfStatus {
    guard(|| {
        let e = unsafe { deref(e, "ensemble") }?;
        let p = e
            .paths
            .get(i)
            .ok_or_else(|| (TfStatus::InvalidArgument, format!("path index {i} out of range")))?;
        let stop_reason = match p.stop_reason {
            StopReason::AVarBelowEps => TfStopReason::AVarBelowEps,
            StopReason::HullEndpoint => TfStopReason::HullEndpoint,
            StopReason::TimeLimit => TfStopReason::TimeLimit,
            StopReason::Breakdown => TfStopReason::Breakdown,
        };
        let res = TfPath { path_id: p.path_id, t_hat: p.t_hat, w_t: p.w_t, n_steps: p.n_steps, stop_reason };
        unsafe { write(out, res, "out") }
    })
}

/// Aggregate statistics of the ensemble.
///
/// # Safety
/// `e` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_ensemble_summary(e: *const TfEnsemble, out: *mut TfSummary) -> TfStatus {
    guard(|| {
        let s = &unsafe { deref(e, "ensemble") }?.summary;
        let res = TfSummary {
            n: s.n,
            n_failed: s.n_failed,
            mean_t: s.mean_t,
            se_t: s.se_t,
            max_t: s.max_t,
            ks_stat: s.ks_stat,
            ks_p: s.ks_p,
        };
        unsafe { write(out, res, "out") }
    })
}

/// Release an ensemble. Null is ignored.
///
/// # Safety
/// `e` must come from [`tf_run_ensemble`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tf_ensemble_free(e: *mut TfEnsemble) {
    if !e.is_null() {
        // SAFETY: created by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(e) });
    }
}
