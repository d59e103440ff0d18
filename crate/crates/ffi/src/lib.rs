//! C ABI over `robustcounter`.
//!
//! Models and solutions cross the boundary as opaque handles. Every
//! fallible call returns an [`RcErrorCode`]; on failure the message is
//! available from [`rc_last_error_message`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and released
//! with [`rc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use robustcounter::model::{export_text, import_text, LinExpr, Model, ObjSense, Sense, Solution, Status, VarId, VarKind};
use robustcounter::robustify::{robustify, Mode};
use robustcounter::solver::{solve, SolverOptions};
use robustcounter::uncertainty::{discrete_deviation, normal_lambda, omega_from_kappa, Distribution, RobustConfig, UncertainSet};
use robustcounter::Error;

/// Opaque model handle.
pub struct RcModel(Model);

/// Opaque solution handle.
pub struct RcSolution(Solution);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcErrorCode {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Model = 5,
    Unsupported = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcVarKind {
    Continuous = 0,
    Binary = 1,
    Integer = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcSense {
    Le = 0,
    Ge = 1,
    Eq = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcMode {
    Irc = 0,
    Rc = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcStatus {
    Optimal = 0,
    Infeasible = 1,
    Unbounded = 2,
    LimitReached = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn classify(e: &Error) -> RcErrorCode {
    match e {
        Error::Parse { .. } => RcErrorCode::Parse,
        Error::Io { .. } => RcErrorCode::Io,
        Error::InvalidParameter(_) | Error::InvalidDistribution(_) | Error::DimensionMismatch(_) => {
            RcErrorCode::InvalidArgument
        }
        Error::UnsupportedDistribution(_) | Error::TooManyEntries { .. } => RcErrorCode::Unsupported,
        _ => RcErrorCode::Model,
    }
}

struct Failure(RcErrorCode, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(classify(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RcErrorCode::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, converting errors and panics into codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcErrorCode {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RcErrorCode::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RcErrorCode::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RcErrorCode::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn model_ref<'a>(p: *const RcModel) -> Result<&'a Model, Failure> {
    p.as_ref().map(|m| &m.0).ok_or_else(|| null("model"))
}

unsafe fn model_mut<'a>(p: *mut RcModel) -> Result<&'a mut Model, Failure> {
    p.as_mut().map(|m| &mut m.0).ok_or_else(|| null("model"))
}

unsafe fn solution_ref<'a>(p: *const RcSolution) -> Result<&'a Solution, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("solution"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn linear(model: &Model, len: usize, indices: *const usize, coeffs: *const f64) -> Result<LinExpr, Failure> {
    if len == 0 {
        return Ok(LinExpr::zero());
    }
    if indices.is_null() || coeffs.is_null() {
        return Err(null("indices/coeffs"));
    }
    let idx = std::slice::from_raw_parts(indices, len);
    let cs = std::slice::from_raw_parts(coeffs, len);
    let mut expr = LinExpr::zero();
    for (&i, &c) in idx.iter().zip(cs) {
        let var = model
            .variables()
            .get(i)
            .ok_or_else(|| Failure(RcErrorCode::InvalidArgument, format!("variable index {i} out of range")))?;
        expr.add_term(var.id(), c);
    }
    Ok(expr)
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(RcErrorCode::InvalidArgument, "string contains NUL".into()))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: `s` came from `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Empty maximization model. Never NULL.
#[no_mangle]
pub extern "C" fn rc_model_new() -> *mut RcModel {
    Box::into_raw(Box::new(RcModel(Model::new())))
}

/// # Safety
/// `model` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_model_free(model: *mut RcModel) {
    if !model.is_null() {
        // SAFETY: handle was produced by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// # Safety
/// `text` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_model_from_text(src: *const c_char, out: *mut *mut RcModel) -> RcErrorCode {
    guard(|| {
        let model = import_text(text(src, "text")?)?;
        write_out(out, Box::into_raw(Box::new(RcModel(model))))
    })
}

/// # Safety
/// `model` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_model_to_text(model: *const RcModel, out: *mut *mut c_char) -> RcErrorCode {
    guard(|| {
        let s = export_text(model_ref(model)?);
        write_out(out, into_c_string(s)?)
    })
}

/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_model_num_variables(model: *const RcModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.num_variables())
}

/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_model_num_constraints(model: *const RcModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.constraints().len())
}

/// Appends a variable and writes its index to `out_index` (may be NULL).
///
/// # Safety
/// `model` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rc_model_add_variable(
    model: *mut RcModel,
    name: *const c_char,
    kind: RcVarKind,
    lower: f64,
    upper: f64,
    out_index: *mut usize,
) -> RcErrorCode {
    guard(|| {
        let m = model_mut(model)?;
        let kind = match kind {
            RcVarKind::Continuous => VarKind::Continuous,
            RcVarKind::Binary => VarKind::Binary,
            RcVarKind::Integer => VarKind::Integer,
        };
        let id = m.add_variable(text(name, "name")?, kind, lower, upper)?;
        if !out_index.is_null() {
            out_index.write(id.index());
        }
        Ok(())
    })
}

/// Adds `Σ coeffs[k]·x[indices[k]] sense rhs`.
///
/// # Safety
/// `indices` and `coeffs` must each point to `len` readable elements.
#[no_mangle]
pub unsafe extern "C" fn rc_model_add_constraint(
    model: *mut RcModel,
    label: *const c_char,
    len: usize,
    indices: *const usize,
    coeffs: *const f64,
    sense: RcSense,
    rhs: f64,
) -> RcErrorCode {
    guard(|| {
        let m = model_mut(model)?;
        let expr = linear(m, len, indices, coeffs)?;
        let sense = match sense {
            RcSense::Le => Sense::Le,
            RcSense::Ge => Sense::Ge,
            RcSense::Eq => Sense::Eq,
        };
        m.add_constraint(text(label, "label")?, expr, sense, rhs)?;
        Ok(())
    })
}

/// # Safety
/// `indices` and `coeffs` must each point to `len` readable elements.
#[no_mangle]
pub unsafe extern "C" fn rc_model_set_objective(
    model: *mut RcModel,
    maximize: bool,
    len: usize,
    indices: *const usize,
    coeffs: *const f64,
) -> RcErrorCode {
    guard(|| {
        let m = model_mut(model)?;
        let expr = linear(m, len, indices, coeffs)?;
        let sense = if maximize { ObjSense::Maximize } else { ObjSense::Minimize };
        m.set_objective(sense, expr)?;
        Ok(())
    })
}

/// Solves with default options. Limits and infeasibility are reported
/// through the solution status, not the return code.
///
/// # Safety
/// `model` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_solve(model: *const RcModel, out: *mut *mut RcSolution) -> RcErrorCode {
    guard(|| {
        let sol = solve(model_ref(model)?, &SolverOptions::default())?;
        write_out(out, Box::into_raw(Box::new(RcSolution(sol))))
    })
}

/// # Safety
/// `solution` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_solution_free(solution: *mut RcSolution) {
    if !solution.is_null() {
        // SAFETY: handle was produced by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Status of a solution; `LimitReached` for a NULL handle.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_solution_status(solution: *const RcSolution) -> RcStatus {
    match solution.as_ref().map(|s| s.0.status) {
        Some(Status::Optimal) => RcStatus::Optimal,
        Some(Status::Infeasible) => RcStatus::Infeasible,
        Some(Status::Unbounded) => RcStatus::Unbounded,
        Some(Status::LimitReached) | None => RcStatus::LimitReached,
    }
}

/// Objective value, NaN when no point is known.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_solution_objective(solution: *const RcSolution) -> f64 {
    match solution.as_ref() {
        Some(s) if !s.0.values.is_empty() => s.0.objective,
        _ => f64::NAN,
    }
}

/// Number of values held (0 when no point is known).
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_solution_num_values(solution: *const RcSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.0.values.len())
}

/// Copies `min(len, num_values)` values into `out`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_solution_values(solution: *const RcSolution, out: *mut f64, len: usize) -> RcErrorCode {
    guard(|| {
        let s = solution_ref(solution)?;
        let n = len.min(s.values.len());
        if n > 0 {
            if out.is_null() {
                return Err(null("out"));
            }
            ptr::copy_nonoverlapping(s.values.as_ptr(), out, n);
        }
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_solution_value(solution: *const RcSolution, index: usize, out: *mut f64) -> RcErrorCode {
    guard(|| {
        let s = solution_ref(solution)?;
        let v = *s
            .values
            .get(index)
            .ok_or_else(|| Failure(RcErrorCode::InvalidArgument, format!("index {index} out of range")))?;
        write_out(out, v)
    })
}

/// `sqrt(-2 ln kappa)`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_omega_from_kappa(kappa: f64, out: *mut f64) -> RcErrorCode {
    guard(|| write_out(out, omega_from_kappa(kappa)?))
}

/// Upper `kappa` quantile of the standard normal.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_normal_lambda(kappa: f64, out: *mut f64) -> RcErrorCode {
    guard(|| write_out(out, normal_lambda(kappa)?))
}

/// Deviation above the mean with tail probability at most `kappa`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rc_poisson_deviation(mean: f64, kappa: f64, out: *mut f64) -> RcErrorCode {
    guard(|| write_out(out, discrete_deviation(&Distribution::Poisson { mean }, kappa)?))
}

/// Builds the robust counterpart of `model` for the annotation text.
///
/// # Safety
/// `model` must be a live handle, `annotations` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rc_robustify(
    model: *const RcModel,
    annotations: *const c_char,
    mode: RcMode,
    epsilon: f64,
    delta: f64,
    kappa: f64,
    out: *mut *mut RcModel,
) -> RcErrorCode {
    guard(|| {
        let m = model_ref(model)?;
        let set = UncertainSet::parse(text(annotations, "annotations")?, m)?;
        let cfg = RobustConfig::new(epsilon, delta, kappa)?;
        let mode = match mode {
            RcMode::Irc => Mode::Irc,
            RcMode::Rc => Mode::Rc,
        };
        let art = robustify(m, &set, mode, &cfg)?;
        write_out(out, Box::into_raw(Box::new(RcModel(art.model))))
    })
}

/// Index of the variable called `name`, or `usize::MAX`.
///
/// # Safety
/// `name` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rc_model_find_variable(model: *const RcModel, name: *const c_char) -> usize {
    let (Some(m), false) = (model.as_ref(), name.is_null()) else {
        return usize::MAX;
    };
    CStr::from_ptr(name)
        .to_str()
        .ok()
        .and_then(|n| m.0.var_by_name(n))
        .map_or(usize::MAX, VarId::index)
}
