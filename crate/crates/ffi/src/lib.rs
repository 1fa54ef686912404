//! C ABI over `specdens`.
//!
//! Handles (`SdModel`, `SdResult`) are opaque and owned by the caller after
//! creation; release them with the matching `*_free`. Every fallible call
//! returns an [`SdStatus`]; on failure the message is kept per thread and can
//! be read with [`sd_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DVector;
use num_complex::Complex64;
use specdens::cheb::{truncation_order, Regime};
use specdens::estimators::{
    plan_algorithm1, plan_fejer_samples, run_algorithm1, run_algorithm2, Alg1Source, Alg2Options,
    EstimationResult, Method, ShotMode,
};
use specdens::kernels::{fejer_plan, AccuracyTarget};
use specdens::metrics::TrialProblem;
use specdens::spectral::{
    normalize_operator, parse_operator_text, random_model, GeneratorSpec, HermitianOperator,
    ProbeState, TargetInterval,
};
use specdens::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    Validation = 2,
    OutOfRegime = 3,
    ResourceCap = 4,
    Io = 5,
    Numeric = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdMethod {
    Fejer = 0,
    QubitizedFejer = 1,
    Git = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdInterval {
    Full = 0,
    Half = 1,
}

/// Accuracy target `(Sigma, Delta, beta, eta)`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdTarget {
    pub sigma: f64,
    pub delta: f64,
    pub beta: f64,
    pub eta: f64,
}

/// GIT truncation plan.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdGitPlan {
    pub lambda: f64,
    /// Order from the closed-form truncation formula.
    pub formula_order: u64,
    /// Order used by the estimator (bound certified at `beta/2`).
    pub order: u64,
    /// 1 for the asymptotic regime, 0 for the intermediate one.
    pub asymptotic: i32,
    pub r_l_bound: f64,
}

/// Operator, probe state and their spectral model.
pub struct SdModel {
    problem: TrialProblem,
}

/// Output of one estimator run.
pub struct SdResult {
    inner: EstimationResult,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SdStatus {
    match e {
        Error::Validation(_) | Error::Domain(_) | Error::Parse { .. } => SdStatus::Validation,
        Error::OutOfRegime(_) => SdStatus::OutOfRegime,
        Error::ResourceCap(_) => SdStatus::ResourceCap,
        Error::Io(_) | Error::Json(_) => SdStatus::Io,
        Error::Numeric(_) => SdStatus::Numeric,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SdStatus::Ok
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            SdStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SdStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::Validation(format!("{name} is not UTF-8"))))
}

unsafe fn put<T>(out: *mut T, v: T, name: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(name));
    }
    out.write(v);
    Ok(())
}

fn target(t: &SdTarget) -> Result<AccuracyTarget, Fail> {
    Ok(AccuracyTarget::new(t.sigma, t.delta, t.beta, t.eta)?)
}

fn method(m: SdMethod) -> Method {
    match m {
        SdMethod::Fejer => Method::Fejer,
        SdMethod::QubitizedFejer => Method::QubitizedFejer,
        SdMethod::Git => Method::Git,
    }
}

fn boxed_model(op: HermitianOperator, psi: ProbeState, out: *mut *mut SdModel) -> Result<(), Fail> {
    let problem = TrialProblem::new(op, psi)?;
    unsafe { put(out, Box::into_raw(Box::new(SdModel { problem })), "out") }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn sd_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Diagonal model: eigenvalues `omegas` with weights `weights` (probe amplitudes
/// `sqrt(weight)`). Weights must be nonnegative and sum to one.
///
/// # Safety
/// `omegas` and `weights` must be valid for `len` reads; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_model_from_spectrum(
    omegas: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut *mut SdModel,
) -> SdStatus {
    guard(|| {
        let w = slice(omegas, len, "omegas")?;
        let a = slice(weights, len, "weights")?;
        if a.iter().any(|x| x.is_nan() || *x < 0.0) {
            return Err(Error::Validation("weights must be nonnegative".into()).into());
        }
        let op = HermitianOperator::from_real_diagonal(w)?;
        let amps = DVector::from_iterator(len, a.iter().map(|x| Complex64::new(x.sqrt(), 0.0)));
        boxed_model(op, ProbeState::new(amps)?, out)
    })
}

/// Random instance from a generator spec (`dense`, `spiked`, `gapped:<d>:<e>`, optional `@radius`).
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_model_generate(
    dim: usize,
    seed: u64,
    spec: *const c_char,
    out: *mut *mut SdModel,
) -> SdStatus {
    guard(|| {
        let spec = GeneratorSpec::parse(str_arg(spec, "spec")?)?;
        let (op, psi) = random_model(dim, seed, &spec)?;
        boxed_model(op, psi, out)
    })
}

/// Model from operator text (`dim n`, matrix rows, `psi` block).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_model_from_text(
    text: *const c_char,
    out: *mut *mut SdModel,
) -> SdStatus {
    guard(|| {
        let (op, psi) = parse_operator_text(str_arg(text, "text")?)?;
        let psi =
            psi.ok_or_else(|| Error::Validation("operator text has no probe state".into()))?;
        boxed_model(op, psi, out)
    })
}

/// Rescales the operator onto `interval` in place; reports the affine map.
///
/// # Safety
/// `model` must be a live handle; `scale` and `shift` may be null.
#[no_mangle]
pub unsafe extern "C" fn sd_model_normalize(
    model: *mut SdModel,
    interval: SdInterval,
    scale: *mut f64,
    shift: *mut f64,
) -> SdStatus {
    guard(|| {
        let m = model.as_mut().ok_or(Fail::Null("model"))?;
        let iv = match interval {
            SdInterval::Full => TargetInterval::Full,
            SdInterval::Half => TargetInterval::Half,
        };
        let (op, map) = normalize_operator(&m.problem.op, iv)?;
        m.problem = TrialProblem::new(op, m.problem.psi.clone())?;
        if !scale.is_null() {
            *scale = map.scale;
        }
        if !shift.is_null() {
            *shift = map.shift;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sd_model_dim(model: *const SdModel) -> usize {
    model.as_ref().map_or(0, |m| m.problem.op.dim())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_model_free(model: *mut SdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Fejer order `N` and sample count `N_S` for a target.
///
/// # Safety
/// `t` must be readable; `n` and `n_s` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_plan_fejer(t: *const SdTarget, n: *mut u64, n_s: *mut u64) -> SdStatus {
    guard(|| {
        let t = target(deref(t, "target")?)?;
        put(n, fejer_plan(&t)?, "n")?;
        put(n_s, plan_fejer_samples(t.beta, t.eta)?, "n_s")
    })
}

/// # Safety
/// `t` must be readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_plan_git(t: *const SdTarget, out: *mut SdGitPlan) -> SdStatus {
    guard(|| {
        let t = target(deref(t, "target")?)?;
        let b = truncation_order(&t)?;
        let plan = SdGitPlan {
            lambda: b.lambda,
            formula_order: b.formula_order as u64,
            order: b.order as u64,
            asymptotic: (b.regime == Regime::Asymptotic) as i32,
            r_l_bound: b.r_l_bound,
        };
        put(out, plan, "out")
    })
}

/// Planned Fejer-type run (Algorithm 1) on the model's spectral distribution.
/// `n_s = 0` keeps the planned sample count.
///
/// # Safety
/// `model` and `t` must be live/readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_estimate_fejer(
    model: *const SdModel,
    m: SdMethod,
    t: *const SdTarget,
    n_s: u64,
    seed: u64,
    out: *mut *mut SdResult,
) -> SdStatus {
    guard(|| {
        let model = deref(model, "model")?;
        let t = target(deref(t, "target")?)?;
        let mut budget = plan_algorithm1(method(m), &t)?;
        if n_s > 0 {
            budget.n_s = n_s;
        }
        let r = run_algorithm1(Alg1Source::Model(&model.problem.model), &budget, seed)?;
        put(out, Box::into_raw(Box::new(SdResult { inner: r })), "out")
    })
}

/// Gaussian-transform run (Algorithm 2) at the frequencies `nu`.
/// `shots_per_order = 0` uses the planned shots; `exact != 0` skips shot noise.
/// The operator spectrum must already lie in `[-1/2, 1/2]`.
///
/// # Safety
/// `model` and `t` must be live/readable; `nu` valid for `n_nu` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_estimate_git(
    model: *const SdModel,
    t: *const SdTarget,
    nu: *const f64,
    n_nu: usize,
    shots_per_order: u64,
    exact: i32,
    seed: u64,
    out: *mut *mut SdResult,
) -> SdStatus {
    guard(|| {
        let model = deref(model, "model")?;
        let t = target(deref(t, "target")?)?;
        let nu = slice(nu, n_nu, "nu")?;
        let shots = match (exact != 0, shots_per_order) {
            (true, _) => ShotMode::Exact,
            (false, 0) => ShotMode::Planned,
            (false, s) => ShotMode::PerOrder(s),
        };
        let opts = Alg2Options {
            shots,
            ..Alg2Options::default()
        };
        let r = run_algorithm2(&model.problem.op, &model.problem.psi, &t, nu, seed, opts)?;
        put(out, Box::into_raw(Box::new(SdResult { inner: r })), "out")
    })
}

/// Number of `(nu, value)` points.
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sd_result_len(r: *const SdResult) -> usize {
    r.as_ref().map_or(0, |r| r.inner.transform.len())
}

/// Total samples spent by the run.
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sd_result_samples(r: *const SdResult) -> u64 {
    r.as_ref().map_or(0, |r| r.inner.budget.n_s)
}

/// Copies up to `cap` points into `nu` and `values`.
///
/// # Safety
/// `r` must be live; `nu` and `values` writable for `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn sd_result_copy(
    r: *const SdResult,
    nu: *mut f64,
    values: *mut f64,
    cap: usize,
) -> SdStatus {
    guard(|| {
        let r = deref(r, "result")?;
        let g = &r.inner.transform;
        if g.len() > cap {
            return Err(Error::Validation(format!("buffer holds {cap}, need {}", g.len())).into());
        }
        if !g.is_empty() && (nu.is_null() || values.is_null()) {
            return Err(Fail::Null("nu/values"));
        }
        ptr::copy_nonoverlapping(g.nu.as_ptr(), nu, g.len());
        ptr::copy_nonoverlapping(g.values.as_ptr(), values, g.len());
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_result_free(r: *mut SdResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
