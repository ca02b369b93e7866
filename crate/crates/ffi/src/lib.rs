//! C ABI over `starloc` sessions.
//!
//! Every call returns a [`StarlocStatus`]. Strings handed out through `out`
//! pointers are owned by the caller and released with [`starloc_string_free`];
//! sessions are released with [`starloc_session_free`]. On failure the message
//! is available from [`starloc_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use starloc::orelab::Side;
use starloc::session::{Session, SessionConfig};
use starloc::verify::{self, VerifyContext};
use starloc::Error;

/// Opaque session handle.
pub struct StarlocSession(Session);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarlocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    NotInvertible = 5,
    VerificationFailed = 6,
    Unsupported = 7,
    Io = 8,
    Internal = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarlocSide {
    Right = 0,
    Left = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(StarlocStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::Json(_) => StarlocStatus::ParseError,
            Error::NotUnit(_) | Error::NotInSet(_) | Error::DivisionByZero => StarlocStatus::NotInvertible,
            Error::StarAxiom(_) => StarlocStatus::VerificationFailed,
            Error::Unsupported(_) => StarlocStatus::Unsupported,
            Error::Io(_) => StarlocStatus::Io,
            _ => StarlocStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(StarlocStatus::Internal, e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

/// Runs `f`, converting errors and panics into a status and the last error.
fn guard(f: impl FnOnce() -> Outcome<StarlocStatus>) -> StarlocStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            StarlocStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure(StarlocStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(StarlocStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Outcome<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn session<'a>(p: *const StarlocSession) -> Outcome<&'a Session> {
    p.as_ref()
        .map(|s| &s.0)
        .ok_or_else(|| Failure(StarlocStatus::NullPointer, "session is null".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Outcome<()> {
    let c = CString::new(s).map_err(|e| Failure(StarlocStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> Outcome<()> {
    if out.is_null() {
        return Err(Failure(StarlocStatus::NullPointer, "output pointer is null".into()));
    }
    // SAFETY: non-null and the caller promises it is writable.
    unsafe { *out = ptr::null_mut() };
    Ok(())
}

/// Creates a session from a JSON configuration, or the default one when
/// `config_json` is null.
///
/// # Safety
/// `config_json` must be null or a NUL-terminated string; `out` must be a
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn starloc_session_new(
    config_json: *const c_char,
    out: *mut *mut StarlocSession,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let config = match optional_text(config_json, "config")? {
            Some(t) => SessionConfig::from_json(t)?,
            None => SessionConfig::default(),
        };
        let s = Session::new(config, None)?;
        *out = Box::into_raw(Box::new(StarlocSession(s)));
        Ok(StarlocStatus::Ok)
    })
}

/// # Safety
/// `session` must be null or a handle from [`starloc_session_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn starloc_session_free(session: *mut StarlocSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn starloc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the most recent failed call on this thread, or null. The
/// pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn starloc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Star product `u ⋆ v`, over the localization at `set` when it is non-null.
///
/// # Safety
/// Pointers must be valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn starloc_eval(
    session: *const StarlocSession,
    u: *const c_char,
    v: *const c_char,
    set: *const c_char,
    out: *mut *mut c_char,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        let r = s.eval(text(u, "u")?, text(v, "v")?, optional_text(set, "set")?)?;
        write_string(out, r)?;
        Ok(StarlocStatus::Ok)
    })
}

/// Star inverse of `g`, over the localization at `set` when it is non-null.
///
/// # Safety
/// Pointers must be valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn starloc_invert(
    session: *const StarlocSession,
    g: *const c_char,
    set: *const c_char,
    out: *mut *mut c_char,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        write_string(out, s.invert(text(g, "g")?, optional_text(set, "set")?)?)?;
        Ok(StarlocStatus::Ok)
    })
}

/// Poisson bracket `{f, g}`.
///
/// # Safety
/// Pointers must be valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn starloc_bracket(
    session: *const StarlocSession,
    f: *const c_char,
    g: *const c_char,
    out: *mut *mut c_char,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        write_string(out, s.bracket(text(f, "f")?, text(g, "g")?)?)?;
        Ok(StarlocStatus::Ok)
    })
}

/// Localization report (JSON) at `set`; `u` and `v` are both null or both set.
///
/// # Safety
/// Pointers must be valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn starloc_localize(
    session: *const StarlocSession,
    set: *const c_char,
    u: *const c_char,
    v: *const c_char,
    out: *mut *mut c_char,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        let args = match (optional_text(u, "u")?, optional_text(v, "v")?) {
            (Some(u), Some(v)) => Some((u, v)),
            (None, None) => None,
            _ => {
                return Err(Failure(
                    StarlocStatus::InvalidArgument,
                    "localize takes either no fractions or two".into(),
                ))
            }
        };
        let report = s.localize(text(set, "set")?, args)?;
        write_string(out, serde_json::to_string(&report)?)?;
        Ok(if report.passed() {
            StarlocStatus::Ok
        } else {
            StarlocStatus::VerificationFailed
        })
    })
}

/// Bounded Ore witness search; writes the JSON report.
///
/// # Safety
/// Pointers must be valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn starloc_ore(
    session: *const StarlocSession,
    r: *const c_char,
    s: *const c_char,
    set: *const c_char,
    side: StarlocSide,
    degree: u32,
    exponent_bound: u32,
    out: *mut *mut c_char,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let sess = self::session(session)?;
        let side = match side {
            StarlocSide::Right => Side::Right,
            StarlocSide::Left => Side::Left,
        };
        let report = sess.ore(
            text(r, "r")?,
            text(s, "s")?,
            text(set, "set")?,
            side,
            degree,
            exponent_bound,
        )?;
        write_string(out, serde_json::to_string(&report)?)?;
        Ok(if report.witness.is_some() && !report.verified {
            StarlocStatus::VerificationFailed
        } else {
            StarlocStatus::Ok
        })
    })
}

/// Runs a verification suite (or `all`) and writes the results as a JSON array.
///
/// # Safety
/// Pointers must be valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn starloc_verify(
    session: *const StarlocSession,
    suite: *const c_char,
    out: *mut *mut c_char,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        let suite = text(suite, "suite")?;
        if s.names().len() != 2 {
            return Err(Failure(
                StarlocStatus::InvalidArgument,
                "verification suites need two variables (x, p)".into(),
            ));
        }
        let ctx = VerifyContext::new(s.star().clone(), s.seed());
        let results = if suite == "all" {
            verify::run_all(&ctx)?
        } else {
            vec![verify::run(suite, &ctx)?]
        };
        write_string(out, serde_json::to_string(&results)?)?;
        Ok(if results.iter().all(|r| r.ok()) {
            StarlocStatus::Ok
        } else {
            StarlocStatus::VerificationFailed
        })
    })
}

/// The session product gauged by `exp(cλΔ)`, as star-product JSON.
///
/// # Safety
/// Pointers must be valid as described in the module documentation.
#[no_mangle]
pub unsafe extern "C" fn starloc_gauge(
    session: *const StarlocSession,
    c: *const c_char,
    out: *mut *mut c_char,
) -> StarlocStatus {
    guard(|| {
        check_out(out)?;
        let s = self::session(session)?;
        write_string(out, serde_json::to_string(&s.gauge(text(c, "c")?)?)?)?;
        Ok(StarlocStatus::Ok)
    })
}
