use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use extdep_ffi::*;

const M4_EXAMPLE: &str = r#"{"type":"m4","rows":[[0.125,0.125,0.125,0.125],[0.625,0.5,0.875,0.125],[0.125,0.25,0.0,0.0],[0.125,0.125,0.0,0.75]]}"#;

fn last_error() -> String {
    unsafe { CStr::from_ptr(extdep_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn model(json: &str) -> *mut ExtdepModel {
    let c = CString::new(json).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { extdep_model_from_json(c.as_ptr(), &mut m) },
        ExtdepStatus::Ok,
        "{}",
        last_error()
    );
    m
}

#[test]
fn model_functionals_and_lambda() {
    let m = model(r#"{"type":"logistic","theta":0.5,"d":4}"#);
    let (i1, i2) = ([1usize, 2], [3usize, 4]);
    let mut f = ExtdepFunctionals {
        eps_i1: 0.0,
        eps_i2: 0.0,
        eps_union: 0.0,
        eps_pair: 0.0,
    };
    let st = unsafe { extdep_model_functionals(m, i1.as_ptr(), 2, i2.as_ptr(), 2, &mut f) };
    assert_eq!(st, ExtdepStatus::Ok);
    assert!((f.eps_pair - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-12);
    let mut lam = 0.0;
    let st = unsafe { extdep_model_lambda(m, i1.as_ptr(), 2, i2.as_ptr(), 2, 1.0, 1.0, &mut lam) };
    assert_eq!(st, ExtdepStatus::Ok);
    assert!((lam - f.eps_pair).abs() < 1e-12);
    let mut d = 0;
    assert_eq!(unsafe { extdep_model_dim(m, &mut d) }, ExtdepStatus::Ok);
    assert_eq!(d, 4);
    unsafe { extdep_model_free(m) };
}

#[test]
fn simulate_then_estimate() {
    let m = model(M4_EXAMPLE);
    let n = 20_000;
    let mut buf = vec![0.0; n * 4];
    let st = unsafe { extdep_simulate(m, n, 7, 0, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(st, ExtdepStatus::Ok, "{}", last_error());
    let mut s = ptr::null_mut();
    let st =
        unsafe { extdep_sample_from_raw(buf.as_ptr(), n, 4, ExtdepMargins::UnitFrechet, &mut s) };
    assert_eq!(st, ExtdepStatus::Ok);
    let (mut rn, mut rd) = (0, 0);
    assert_eq!(
        unsafe { extdep_sample_shape(s, &mut rn, &mut rd) },
        ExtdepStatus::Ok
    );
    assert_eq!((rn, rd), (n, 4));

    let (i1, i2) = ([1usize, 2], [3usize, 4]);
    let mut e = std::mem::MaybeUninit::<ExtdepEstimate>::uninit();
    let st = unsafe {
        extdep_estimate_eps_pair(s, i1.as_ptr(), 2, i2.as_ptr(), 2, 0.95, e.as_mut_ptr())
    };
    assert_eq!(st, ExtdepStatus::Ok);
    let e = unsafe { e.assume_init() };
    assert_eq!(e.n, n);
    assert_eq!(e.provenance, ExtdepProvenance::KnownMargins);
    assert!((e.value - 0.875).abs() < 3.0 * e.std_error, "{e:?}");
    assert!(e.ci_low < e.value && e.value < e.ci_high);

    let mut e2 = std::mem::MaybeUninit::<ExtdepEstimate>::uninit();
    let st = unsafe {
        extdep_estimate_lambda(
            s,
            i1.as_ptr(),
            2,
            i2.as_ptr(),
            2,
            1.0,
            1.0,
            0.95,
            e2.as_mut_ptr(),
        )
    };
    assert_eq!(st, ExtdepStatus::Ok);
    assert_eq!(unsafe { e2.assume_init() }.value, e.value);

    let mut e3 = std::mem::MaybeUninit::<ExtdepEstimate>::uninit();
    let st = unsafe {
        extdep_estimate_l_pair(
            s,
            i1.as_ptr(),
            2,
            i2.as_ptr(),
            2,
            1.0,
            1.0,
            0.9,
            e3.as_mut_ptr(),
        )
    };
    assert_eq!(st, ExtdepStatus::Ok);
    assert_eq!(unsafe { e3.assume_init() }.level, 0.9);

    let mut e4 = std::mem::MaybeUninit::<ExtdepEstimate>::uninit();
    let st = unsafe { extdep_estimate_eps_scaled(s, i1.as_ptr(), 2, 1.0, 0.95, e4.as_mut_ptr()) };
    assert_eq!(st, ExtdepStatus::Ok);

    let x = [1.0, 1.0, f64::INFINITY, f64::INFINITY];
    let mut e5 = std::mem::MaybeUninit::<ExtdepEstimate>::uninit();
    let st = unsafe { extdep_estimate_stdf(s, x.as_ptr(), 4, 0.95, e5.as_mut_ptr()) };
    assert_eq!(st, ExtdepStatus::Ok);
    assert_eq!(
        unsafe { e4.assume_init() }.value,
        unsafe { e5.assume_init() }.value
    );

    let mut rank = ptr::null_mut();
    let st = unsafe { extdep_sample_from_raw(buf.as_ptr(), n, 4, ExtdepMargins::Ranks, &mut rank) };
    assert_eq!(st, ExtdepStatus::Ok);
    let mut r = std::mem::MaybeUninit::<ExtdepEstimate>::uninit();
    let st = unsafe {
        extdep_estimate_eps_pair(rank, i1.as_ptr(), 2, i2.as_ptr(), 2, 0.95, r.as_mut_ptr())
    };
    assert_eq!(st, ExtdepStatus::Ok);
    let r = unsafe { r.assume_init() };
    assert_eq!(r.provenance, ExtdepProvenance::EmpiricalRanks);
    assert!(r.se_approximate);

    unsafe {
        extdep_sample_free(s);
        extdep_sample_free(rank);
        extdep_model_free(m);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut m = ptr::null_mut();
    let bad = CString::new(r#"{"type":"logistic","theta":1.5,"d":4}"#).unwrap();
    assert_eq!(
        unsafe { extdep_model_from_json(bad.as_ptr(), &mut m) },
        ExtdepStatus::InvalidArgument
    );
    assert!(m.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { extdep_model_from_json(ptr::null(), &mut m) },
        ExtdepStatus::NullPointer
    );

    let m = model(M4_EXAMPLE);
    let (i1, i2) = ([1usize, 2], [2usize, 4]);
    let mut f = ExtdepFunctionals {
        eps_i1: 0.0,
        eps_i2: 0.0,
        eps_union: 0.0,
        eps_pair: 0.0,
    };
    let st = unsafe { extdep_model_functionals(m, i1.as_ptr(), 2, i2.as_ptr(), 2, &mut f) };
    assert_eq!(st, ExtdepStatus::InvalidArgument);
    assert!(last_error().contains("overlap"), "{}", last_error());

    let mut small = vec![0.0; 3];
    let st = unsafe { extdep_simulate(m, 10, 1, 0, small.as_mut_ptr(), small.len()) };
    assert_eq!(st, ExtdepStatus::BufferTooSmall);

    let ones = vec![1.0; 40];
    let mut s = ptr::null_mut();
    let st = unsafe {
        extdep_sample_from_pseudo(ones.as_ptr(), 10, 4, ExtdepProvenance::KnownMargins, &mut s)
    };
    assert_eq!(
        st,
        ExtdepStatus::InvalidArgument,
        "values equal to 1 are outside (0,1)"
    );
    // near-constant columns push the mean of the row maxima to 1
    let near = vec![1.0 - 1e-15; 40];
    let st = unsafe {
        extdep_sample_from_pseudo(near.as_ptr(), 10, 4, ExtdepProvenance::KnownMargins, &mut s)
    };
    assert_eq!(st, ExtdepStatus::Ok);
    let x = [1.0; 4];
    let mut e = std::mem::MaybeUninit::<ExtdepEstimate>::uninit();
    let st = unsafe { extdep_estimate_stdf(s, x.as_ptr(), 4, 0.95, e.as_mut_ptr()) };
    assert_eq!(st, ExtdepStatus::Numeric, "{}", last_error());

    let st = unsafe { extdep_estimate_stdf(ptr::null(), x.as_ptr(), 4, 0.95, e.as_mut_ptr()) };
    assert_eq!(st, ExtdepStatus::NullPointer);
    let ok = unsafe { extdep_model_dim(m, &mut 0) };
    assert_eq!(ok, ExtdepStatus::Ok);
    assert!(last_error().is_empty());
    unsafe {
        extdep_sample_free(s);
        extdep_model_free(m);
        extdep_sample_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(extdep_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/extdep.h")
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct ExtdepSample ExtdepSample",
        "typedef struct ExtdepModel ExtdepModel",
        "EXTDEP_STATUS_NUMERIC = 3",
        "extdep_last_error_message",
        "extdep_sample_from_raw",
        "extdep_model_from_json",
        "extdep_estimate_eps_pair",
        "extdep_simulate",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "extdep.h"
int run(void) {
    ExtdepModel *m = NULL;
    ExtdepFunctionals f;
    size_t i1[] = {1, 2}, i2[] = {3, 4};
    if (extdep_model_from_json("{\"type\":\"minfactor\"}", &m) != EXTDEP_STATUS_OK) return 1;
    ExtdepStatus st = extdep_model_functionals(m, i1, 2, i2, 2, &f);
    extdep_model_free(m);
    return st == EXTDEP_STATUS_OK ? 0 : 2;
}
"#,
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-c"])
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg("-o")
        .arg(dir.path().join("use.o"))
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
}
