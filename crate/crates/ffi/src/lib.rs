//! C ABI over `extdep-core`.
//!
//! Every function returns an [`ExtdepStatus`]; on failure a message is kept
//! per thread and can be read with [`extdep_last_error_message`]. Samples and
//! models are opaque handles released with their `_free` function. Column
//! indices are one-based, as in the command-line tool.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use extdep::estimate::{
    eps_pair_estimate, eps_scaled_estimate, l_pair_estimate, lambda_estimate, stdf_estimate,
    Estimate,
};
use extdep::sample::{one_based_set, pit_transform, rank_transform, Margin, Margins, PseudoSample};
use extdep::simulate::{simulate, Seed};
use extdep::{make_index_pair, Error, IndexPair, ModelSpec, Provenance, RawSample};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtdepStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid input: bad indices, shapes, parameters or JSON.
    InvalidArgument = 2,
    /// Numerically degenerate data or no exact value available.
    Numeric = 3,
    /// Output buffer too small.
    BufferTooSmall = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// How raw observations are mapped to (0, 1).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtdepMargins {
    /// Ranks / (n + 1).
    Ranks = 0,
    UnitFrechet = 1,
    Uniform = 2,
    StdNormal = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtdepProvenance {
    KnownMargins = 0,
    EmpiricalRanks = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtdepEstimate {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub n: usize,
    pub provenance: ExtdepProvenance,
    /// True when the standard error ignores margin estimation.
    pub se_approximate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtdepFunctionals {
    pub eps_i1: f64,
    pub eps_i2: f64,
    pub eps_union: f64,
    pub eps_pair: f64,
}

/// Pseudo-observations in (0, 1).
pub struct ExtdepSample(PseudoSample);

/// A validated model specification.
pub struct ExtdepModel(ModelSpec);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Null(&'static str),
    Core(Error),
    Buffer(usize, usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> ExtdepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ExtdepStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            ExtdepStatus::NullPointer
        }
        Ok(Err(Fail::Buffer(need, got))) => {
            set_error(&format!("buffer holds {got} values, {need} needed"));
            ExtdepStatus::BufferTooSmall
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            if e.is_numeric() {
                ExtdepStatus::Numeric
            } else {
                ExtdepStatus::InvalidArgument
            }
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            ExtdepStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> FfiResult {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

fn c_estimate(e: &Estimate) -> ExtdepEstimate {
    ExtdepEstimate {
        value: e.value,
        std_error: e.std_error,
        ci_low: e.ci_low,
        ci_high: e.ci_high,
        level: e.level,
        n: e.n,
        provenance: match e.provenance {
            Provenance::KnownMargins => ExtdepProvenance::KnownMargins,
            Provenance::EmpiricalRanks => ExtdepProvenance::EmpiricalRanks,
        },
        se_approximate: e.se_approximate,
    }
}

unsafe fn pair_arg(
    i1: *const usize,
    n1: usize,
    i2: *const usize,
    n2: usize,
    d: usize,
) -> Result<IndexPair, Fail> {
    Ok(make_index_pair(
        slice(i1, n1, "i1")?,
        slice(i2, n2, "i2")?,
        d,
    )?)
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn extdep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn extdep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a sample from `n * d` row-major observations.
///
/// # Safety
/// `data` must point to `n * d` readable doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn extdep_sample_from_raw(
    data: *const f64,
    n: usize,
    d: usize,
    margins: ExtdepMargins,
    out: *mut *mut ExtdepSample,
) -> ExtdepStatus {
    guard(|| {
        let len = n
            .checked_mul(d)
            .ok_or(Error::Shape("n * d overflows".into()))?;
        let raw = RawSample::new(slice(data, len, "data")?.to_vec(), n, d)?;
        let known = |m| pit_transform(&raw, &Margins::uniform(m, d));
        let u = match margins {
            ExtdepMargins::Ranks => rank_transform(&raw)?,
            ExtdepMargins::UnitFrechet => known(Margin::UnitFrechet)?,
            ExtdepMargins::Uniform => known(Margin::Uniform01)?,
            ExtdepMargins::StdNormal => known(Margin::StdNormal)?,
        };
        write(out, Box::into_raw(Box::new(ExtdepSample(u))), "out")
    })
}

/// Builds a sample from pseudo-observations already in (0, 1).
///
/// # Safety
/// As for [`extdep_sample_from_raw`].
#[no_mangle]
pub unsafe extern "C" fn extdep_sample_from_pseudo(
    data: *const f64,
    n: usize,
    d: usize,
    provenance: ExtdepProvenance,
    out: *mut *mut ExtdepSample,
) -> ExtdepStatus {
    guard(|| {
        let len = n
            .checked_mul(d)
            .ok_or(Error::Shape("n * d overflows".into()))?;
        let p = match provenance {
            ExtdepProvenance::KnownMargins => Provenance::KnownMargins,
            ExtdepProvenance::EmpiricalRanks => Provenance::EmpiricalRanks,
        };
        let u = PseudoSample::new(slice(data, len, "data")?.to_vec(), n, d, p)?;
        write(out, Box::into_raw(Box::new(ExtdepSample(u))), "out")
    })
}

/// # Safety
/// `sample` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn extdep_sample_free(sample: *mut ExtdepSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// # Safety
/// `sample` must be a live handle; `n` and `d` writable (either may be null).
#[no_mangle]
pub unsafe extern "C" fn extdep_sample_shape(
    sample: *const ExtdepSample,
    n: *mut usize,
    d: *mut usize,
) -> ExtdepStatus {
    guard(|| {
        let s = &handle(sample, "sample")?.0;
        if !n.is_null() {
            n.write(s.n());
        }
        if !d.is_null() {
            d.write(s.d());
        }
        Ok(())
    })
}

/// Parses a JSON model spec, e.g. `{"type":"logistic","theta":0.5,"d":4}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn extdep_model_from_json(
    json: *const c_char,
    out: *mut *mut ExtdepModel,
) -> ExtdepStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::Config(format!("model JSON is not UTF-8: {e}")))?;
        let model: ModelSpec = serde_json::from_str(text).map_err(Error::from)?;
        write(out, Box::into_raw(Box::new(ExtdepModel(model))), "out")
    })
}

/// # Safety
/// `model` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn extdep_model_free(model: *mut ExtdepModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `d` writable.
#[no_mangle]
pub unsafe extern "C" fn extdep_model_dim(
    model: *const ExtdepModel,
    d: *mut usize,
) -> ExtdepStatus {
    guard(|| write(d, handle(model, "model")?.0.d(), "d"))
}

/// Exact extremal coefficients of the model for the pair (I1, I2).
///
/// # Safety
/// Index arrays must hold `n1` / `n2` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn extdep_model_functionals(
    model: *const ExtdepModel,
    i1: *const usize,
    n1: usize,
    i2: *const usize,
    n2: usize,
    out: *mut ExtdepFunctionals,
) -> ExtdepStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let f = m.functionals(&pair_arg(i1, n1, i2, n2, m.d())?)?;
        let c = ExtdepFunctionals {
            eps_i1: f.eps_i1,
            eps_i2: f.eps_i2,
            eps_union: f.eps_union,
            eps_pair: f.eps_pair,
        };
        write(out, c, "out")
    })
}

/// Exact upper-tail dependence function Lambda_U(x, y).
///
/// # Safety
/// As for [`extdep_model_functionals`].
#[no_mangle]
pub unsafe extern "C" fn extdep_model_lambda(
    model: *const ExtdepModel,
    i1: *const usize,
    n1: usize,
    i2: *const usize,
    n2: usize,
    x: f64,
    y: f64,
    out: *mut f64,
) -> ExtdepStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let f = m.functionals(&pair_arg(i1, n1, i2, n2, m.d())?)?;
        if !(x >= 0.0 && y >= 0.0) {
            return Err(Error::OutOfDomain(format!("({x}, {y})")).into());
        }
        write(out, f.lambda_u(x, y), "out")
    })
}

/// Simulates `n` rows into `buf` (row-major, `n * d` doubles, model margins).
///
/// # Safety
/// `buf` must have room for `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn extdep_simulate(
    model: *const ExtdepModel,
    n: usize,
    seed: u64,
    stream: u64,
    buf: *mut f64,
    buf_len: usize,
) -> ExtdepStatus {
    guard(|| {
        let m = &handle(model, "model")?.0;
        let need = n
            .checked_mul(m.d())
            .ok_or(Error::Shape("n * d overflows".into()))?;
        if buf_len < need {
            return Err(Fail::Buffer(need, buf_len));
        }
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        let sim = simulate(m, n, Seed::new(seed, stream))?;
        std::slice::from_raw_parts_mut(buf, need).copy_from_slice(sim.raw.data());
        Ok(())
    })
}

/// Estimate of eps_(I1,I2) = eps_I1 + eps_I2 - eps_(I1 u I2).
///
/// # Safety
/// Index arrays must hold `n1` / `n2` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn extdep_estimate_eps_pair(
    sample: *const ExtdepSample,
    i1: *const usize,
    n1: usize,
    i2: *const usize,
    n2: usize,
    level: f64,
    out: *mut ExtdepEstimate,
) -> ExtdepStatus {
    guard(|| {
        let s = &handle(sample, "sample")?.0;
        let e = eps_pair_estimate(s, &pair_arg(i1, n1, i2, n2, s.d())?)?.at_level(level)?;
        write(out, c_estimate(&e), "out")
    })
}

/// Estimate of Lambda_U(x, y).
///
/// # Safety
/// As for [`extdep_estimate_eps_pair`].
#[no_mangle]
pub unsafe extern "C" fn extdep_estimate_lambda(
    sample: *const ExtdepSample,
    i1: *const usize,
    n1: usize,
    i2: *const usize,
    n2: usize,
    x: f64,
    y: f64,
    level: f64,
    out: *mut ExtdepEstimate,
) -> ExtdepStatus {
    guard(|| {
        let s = &handle(sample, "sample")?.0;
        let e = lambda_estimate(s, &pair_arg(i1, n1, i2, n2, s.d())?, x, y)?.at_level(level)?;
        write(out, c_estimate(&e), "out")
    })
}

/// Estimate of l^(I1,I2)(1/x, 1/y).
///
/// # Safety
/// As for [`extdep_estimate_eps_pair`].
#[no_mangle]
pub unsafe extern "C" fn extdep_estimate_l_pair(
    sample: *const ExtdepSample,
    i1: *const usize,
    n1: usize,
    i2: *const usize,
    n2: usize,
    x: f64,
    y: f64,
    level: f64,
    out: *mut ExtdepEstimate,
) -> ExtdepStatus {
    guard(|| {
        let s = &handle(sample, "sample")?.0;
        let e = l_pair_estimate(s, &pair_arg(i1, n1, i2, n2, s.d())?, x, y)?.at_level(level)?;
        write(out, c_estimate(&e), "out")
    })
}

/// Estimate of x * eps_I for a one-based column set.
///
/// # Safety
/// `set` must hold `len` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn extdep_estimate_eps_scaled(
    sample: *const ExtdepSample,
    set: *const usize,
    len: usize,
    x: f64,
    level: f64,
    out: *mut ExtdepEstimate,
) -> ExtdepStatus {
    guard(|| {
        let s = &handle(sample, "sample")?.0;
        let cols = one_based_set(slice(set, len, "set")?, s.d())?;
        let e = eps_scaled_estimate(s, &cols, x)?.at_level(level)?;
        write(out, c_estimate(&e), "out")
    })
}

/// Estimate of -log F(x_1, ..., x_d); `x_j = INFINITY` drops column j.
///
/// # Safety
/// `x` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn extdep_estimate_stdf(
    sample: *const ExtdepSample,
    x: *const f64,
    len: usize,
    level: f64,
    out: *mut ExtdepEstimate,
) -> ExtdepStatus {
    guard(|| {
        let s = &handle(sample, "sample")?.0;
        let e = stdf_estimate(s, slice(x, len, "x")?)?.at_level(level)?;
        write(out, c_estimate(&e), "out")
    })
}
