use std::ffi::{CStr, CString};
use std::ptr;

use tiltflow_ffi::*;

fn measure(json: &str) -> *mut TfMeasure {
    let s = CString::new(json).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tf_measure_from_json(s.as_ptr(), &mut m) }, TfStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(tf_last_error_message()) }.to_str().unwrap().to_owned()
}

#[test]
fn moments_and_solve() {
    let m = measure(r#"{"type": "gaussian", "sigma": 1}"#);
    let mut out = TfMoments::default();
    assert_eq!(unsafe { tf_tilted_moments(m, 1.0, 2.0, &mut out) }, TfStatus::Ok);
    assert!((out.a - 1.0).abs() < 1e-12 && (out.var - 0.5).abs() < 1e-12);
    assert!((out.v - std::f64::consts::E / std::f64::consts::SQRT_2).abs() < 1e-9);
    let mut c = f64::NAN;
    assert_eq!(unsafe { tf_solve_c(m, 1.0, 1.0, &mut c) }, TfStatus::Ok);
    assert!((c - 2.0).abs() < 1e-9);
    assert_eq!(unsafe { tf_measure_variance(m) }, 1.0);
    unsafe { tf_measure_free(m) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let s = CString::new(r#"{"type": "atoms", "points": [0, 2], "weights": [0.5, 0.5]}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tf_measure_from_json(s.as_ptr(), &mut m) }, TfStatus::InvalidMeasure);
    assert!(m.is_null());
    assert!(last_error().contains("not centered"), "{}", last_error());

    assert_eq!(unsafe { tf_measure_from_json(ptr::null(), &mut m) }, TfStatus::NullPointer);

    let u = measure(r#"{"type": "uniform", "lo": -1, "hi": 1}"#);
    let mut c = 0.0;
    assert_eq!(unsafe { tf_solve_c(u, 1.5, 0.0, &mut c) }, TfStatus::InvalidTilt);
    assert_eq!(unsafe { tf_solve_c(u, 0.0, 0.0, ptr::null_mut()) }, TfStatus::NullPointer);
    let mut mo = TfMoments::default();
    assert_eq!(unsafe { tf_tilted_moments(u, -1.0, 0.0, &mut mo) }, TfStatus::InvalidTilt);
    assert_eq!(unsafe { tf_solve_c(u, 0.0, 0.0, &mut c) }, TfStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe { tf_measure_free(u) };
    unsafe { tf_measure_free(ptr::null_mut()) };
}

#[test]
fn ensemble_round_trip() {
    let m = measure(r#"{"type": "atoms", "points": [-1, 1], "weights": [0.5, 0.5]}"#);
    let mut opts = std::mem::MaybeUninit::<TfSimOptions>::uninit();
    assert_eq!(unsafe { tf_sim_options_default(m, opts.as_mut_ptr()) }, TfStatus::Ok);
    let mut opts = unsafe { opts.assume_init() };
    opts.seed = 9;
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { tf_run_ensemble(m, &opts, 64, &mut e) }, TfStatus::Ok);
    assert_eq!(unsafe { tf_ensemble_len(e) }, 64);
    let mut p = std::mem::MaybeUninit::<TfPath>::uninit();
    for i in 0..64 {
        assert_eq!(unsafe { tf_ensemble_path(e, i, p.as_mut_ptr()) }, TfStatus::Ok);
        let p = unsafe { p.assume_init() };
        assert_eq!(p.path_id, i as u64);
        assert_eq!(p.stop_reason, TfStopReason::HullEndpoint);
        assert!(p.w_t.abs() == 1.0);
    }
    assert_eq!(unsafe { tf_ensemble_path(e, 64, p.as_mut_ptr()) }, TfStatus::InvalidArgument);
    let mut s = TfSummary::default();
    assert_eq!(unsafe { tf_ensemble_summary(e, &mut s) }, TfStatus::Ok);
    assert_eq!((s.n, s.n_failed), (64, 0));
    assert!(s.mean_t > 0.0);

    opts.dt_max = -1.0;
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { tf_run_ensemble(m, &opts, 8, &mut bad) }, TfStatus::InvalidArgument);
    assert!(bad.is_null());
    unsafe { tf_ensemble_free(e) };
    unsafe { tf_measure_free(m) };
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(tf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/tiltflow.h");
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(status) = std::process::Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .status()
        else {
            eprintln!("{compiler} not available, skipping");
            continue;
        };
        assert!(status.success(), "{compiler} rejected the header");
    }
}
