use std::ffi::{CStr, CString};
use std::ptr;

use starloc_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { starloc_string_free(p) };
    s
}

fn last_error() -> String {
    let p = starloc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

struct Handle(*mut StarlocSession);

impl Handle {
    fn new(config: Option<&str>) -> Self {
        let cfg = config.map(c);
        let mut h = ptr::null_mut();
        let st = unsafe { starloc_session_new(cfg.as_ref().map_or(ptr::null(), |c| c.as_ptr()), &mut h) };
        assert_eq!(st, StarlocStatus::Ok);
        Handle(h)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { starloc_session_free(self.0) };
    }
}

#[test]
fn eval_invert_bracket() {
    let h = Handle::new(None);
    let mut out = ptr::null_mut();
    let (p, x) = (c("p"), c("x"));
    assert_eq!(
        unsafe { starloc_eval(h.0, p.as_ptr(), x.as_ptr(), ptr::null(), &mut out) },
        StarlocStatus::Ok
    );
    assert_eq!(take(out), "p*x + L");
    let sx = c("Sx");
    assert_eq!(
        unsafe { starloc_invert(h.0, x.as_ptr(), sx.as_ptr(), &mut out) },
        StarlocStatus::Ok
    );
    assert_eq!(take(out), "1/x");
    assert_eq!(
        unsafe { starloc_bracket(h.0, p.as_ptr(), x.as_ptr(), &mut out) },
        StarlocStatus::Ok
    );
    assert_eq!(take(out), "1/2");
}

#[test]
fn errors_set_status_and_message() {
    let h = Handle::new(None);
    let mut out = ptr::null_mut();
    let (bad, x) = (c("p +* x"), c("x"));
    let st = unsafe { starloc_eval(h.0, bad.as_ptr(), x.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(st, StarlocStatus::ParseError);
    assert!(out.is_null());
    assert!(last_error().contains("parse"));

    let st = unsafe { starloc_invert(h.0, x.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(st, StarlocStatus::NotInvertible);

    let st = unsafe { starloc_eval(ptr::null(), x.as_ptr(), x.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(st, StarlocStatus::NullPointer);

    let unknown = c("Sy");
    let st = unsafe { starloc_invert(h.0, x.as_ptr(), unknown.as_ptr(), &mut out) };
    assert_eq!(st, StarlocStatus::InvalidArgument);

    let st = unsafe { starloc_bracket(h.0, x.as_ptr(), x.as_ptr(), &mut out) };
    assert_eq!(st, StarlocStatus::Ok);
    assert!(starloc_last_error().is_null());
    take(out);
}

#[test]
fn bad_config_is_rejected() {
    let cfg = c(r#"{"vars": ["x", "p"], "bogus": 1}"#);
    let mut h = ptr::null_mut();
    let st = unsafe { starloc_session_new(cfg.as_ptr(), &mut h) };
    assert_eq!(st, StarlocStatus::ParseError);
    assert!(h.is_null());
    assert_eq!(
        unsafe { starloc_session_new(ptr::null(), ptr::null_mut()) },
        StarlocStatus::NullPointer
    );
}

#[test]
fn ore_finds_witness() {
    let h = Handle::new(Some(r#"{"trunc": 4}"#));
    let (r, s, set) = (c("p"), c("x"), c("Sx"));
    let mut out = ptr::null_mut();
    let st = unsafe {
        starloc_ore(
            h.0,
            r.as_ptr(),
            s.as_ptr(),
            set.as_ptr(),
            StarlocSide::Right,
            2,
            3,
            &mut out,
        )
    };
    assert_eq!(st, StarlocStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["verified"], true);
}

#[test]
fn localize_verify_gauge_produce_json() {
    let h = Handle::new(Some(r#"{"trunc": 3}"#));
    let mut out = ptr::null_mut();
    let set = c("Sx");
    let st = unsafe { starloc_localize(h.0, set.as_ptr(), ptr::null(), ptr::null(), &mut out) };
    assert_eq!(st, StarlocStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["validated"], true);

    let suite = c("antiautomorphism");
    assert_eq!(
        unsafe { starloc_verify(h.0, suite.as_ptr(), &mut out) },
        StarlocStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v[0]["passed"], v[0]["total"]);

    let half = c("1/2");
    assert_eq!(
        unsafe { starloc_gauge(h.0, half.as_ptr(), &mut out) },
        StarlocStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(v["trunc"], 3);
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../include/starloc.h")).unwrap();
    for name in [
        "starloc_session_new",
        "starloc_session_free",
        "starloc_string_free",
        "starloc_last_error",
        "STARLOC_STATUS_OK",
        "typedef struct StarlocSession StarlocSession",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
