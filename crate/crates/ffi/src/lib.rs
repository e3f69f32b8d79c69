//! C ABI over the logiclm parsers and engines.
//!
//! Programs are opaque handles created by [`logiclm_program_parse`] and
//! released with [`logiclm_program_free`]. Every fallible call returns a
//! [`LogiclmStatus`]; on failure, [`logiclm_last_error`] describes what went
//! wrong on the calling thread. Strings returned through out-parameters are
//! owned by the caller and released with [`logiclm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use logiclm::csp;
use logiclm::pipeline::run::{solve_symbolic, Program, SolveLimits, SymbolicResult};
use logiclm::pipeline::TaskKind;
use logiclm::TruthValue;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogiclmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseFailed = 3,
    ExecutionFailed = 4,
    InvalidArgument = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogiclmKind {
    /// Logic program: Predicates / Facts / Rules / Query.
    Lp = 0,
    /// First-order logic: Facts / Query.
    Fol = 1,
    /// Constraint model: Domain / Variables / Constraints / Query.
    Csp = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogiclmTruth {
    Proved = 0,
    Disproved = 1,
    Unknown = 2,
}

impl From<TruthValue> for LogiclmTruth {
    fn from(t: TruthValue) -> Self {
        match t {
            TruthValue::Proved => LogiclmTruth::Proved,
            TruthValue::Disproved => LogiclmTruth::Disproved,
            TruthValue::Unknown => LogiclmTruth::Unknown,
        }
    }
}

/// A parsed formulation.
pub struct LogiclmProgram {
    program: Program,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: LogiclmStatus, message: impl Into<String>) -> LogiclmStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> LogiclmStatus) -> LogiclmStatus {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(LogiclmStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LogiclmStatus> {
    if s.is_null() {
        return Err(fail(LogiclmStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(LogiclmStatus::InvalidUtf8, e.to_string()))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// The message for the last failed call on this thread, or null. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn logiclm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn logiclm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses `text` as a formulation of the given kind. On success `*out`
/// receives a new handle. On `ParseFailed` the last error lists every
/// diagnostic, one per line.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn logiclm_program_parse(
    kind: LogiclmKind,
    text: *const c_char,
    out: *mut *mut LogiclmProgram,
) -> LogiclmStatus {
    guard(|| {
        if out.is_null() {
            return fail(LogiclmStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let kind = match kind {
            LogiclmKind::Lp => TaskKind::Deductive,
            LogiclmKind::Fol => TaskKind::Fol,
            LogiclmKind::Csp => TaskKind::Csp,
        };
        match Program::parse(kind, text) {
            Ok((program, _)) => {
                *out = Box::into_raw(Box::new(LogiclmProgram { program }));
                LogiclmStatus::Ok
            }
            Err(errors) => {
                let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
                fail(LogiclmStatus::ParseFailed, lines.join("\n"))
            }
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `program` must come from [`logiclm_program_parse`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn logiclm_program_free(program: *mut LogiclmProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Canonical text of the program; free it with [`logiclm_string_free`].
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn logiclm_program_print(program: *const LogiclmProgram, out: *mut *mut c_char) -> LogiclmStatus {
    guard(|| {
        if program.is_null() || out.is_null() {
            return fail(LogiclmStatus::NullArgument, "null argument");
        }
        *out = to_c_string((*program).program.print());
        LogiclmStatus::Ok
    })
}

/// Answers the query of a logic program or first-order formulation with
/// default limits.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn logiclm_program_query(
    program: *const LogiclmProgram,
    out: *mut LogiclmTruth,
) -> LogiclmStatus {
    guard(|| {
        if program.is_null() || out.is_null() {
            return fail(LogiclmStatus::NullArgument, "null argument");
        }
        let p = &(*program).program;
        if matches!(p, Program::Csp(_)) {
            return fail(
                LogiclmStatus::InvalidArgument,
                "constraint models have options, not a query; use logiclm_program_evaluate_option",
            );
        }
        let limits = SolveLimits::default();
        match solve_symbolic(p, &limits) {
            Ok(SymbolicResult::Entailment(v)) => {
                *out = v.value.into();
                LogiclmStatus::Ok
            }
            Ok(other) => fail(LogiclmStatus::InvalidArgument, format!("unexpected result {other}")),
            Err(e) => fail(LogiclmStatus::ExecutionFailed, e.to_string()),
        }
    })
}

/// Evaluates the lettered option (`'A'`, `'B'`, ...) of a constraint model
/// over all of its solutions.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn logiclm_program_evaluate_option(
    program: *const LogiclmProgram,
    letter: c_char,
    out: *mut LogiclmTruth,
) -> LogiclmStatus {
    guard(|| {
        if program.is_null() || out.is_null() {
            return fail(LogiclmStatus::NullArgument, "null argument");
        }
        let Program::Csp(model) = &(*program).program else {
            return fail(
                LogiclmStatus::InvalidArgument,
                "options exist only in constraint models",
            );
        };
        let letter = letter as u8 as char;
        let Some(opt) = model.options.get(&letter) else {
            return fail(
                LogiclmStatus::InvalidArgument,
                format!("the model has no option '{letter}'"),
            );
        };
        match csp::evaluate_option(model, &opt.expr) {
            Ok(t) => {
                *out = t.into();
                LogiclmStatus::Ok
            }
            Err(e) => fail(LogiclmStatus::ExecutionFailed, e.to_string()),
        }
    })
}

/// Number of solutions of a constraint model, failing past `max_solutions`.
///
/// # Safety
/// `program` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn logiclm_program_count_solutions(
    program: *const LogiclmProgram,
    max_solutions: usize,
    out: *mut usize,
) -> LogiclmStatus {
    guard(|| {
        if program.is_null() || out.is_null() {
            return fail(LogiclmStatus::NullArgument, "null argument");
        }
        let Program::Csp(model) = &(*program).program else {
            return fail(LogiclmStatus::InvalidArgument, "not a constraint model");
        };
        match csp::solve_all(model, max_solutions) {
            Ok(s) => {
                *out = s.solutions.len();
                LogiclmStatus::Ok
            }
            Err(e) => fail(LogiclmStatus::ExecutionFailed, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn logiclm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
