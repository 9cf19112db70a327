//! C interface to `domino-core`.
//!
//! Machines cross the boundary as opaque [`DominoMachine`] handles. Every
//! fallible call returns a [`DominoStatus`]; the message of the last failure
//! on the calling thread is available from [`domino_last_error`]. Strings
//! returned through out-pointers are owned by the caller and released with
//! [`domino_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use domino_core::relations::simulates;
use domino_core::report::{build_report, compare};
use domino_core::{behavior_included, build_abstract_machine, build_quotient_machine, Error, ExternalMode, IntervalSpec, StateMachine};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NotAccepted = 4,
    InvalidArgument = 5,
    IncompatibleAlphabets = 6,
    Internal = 7,
}

/// External alphabet: outputs only, or input/output pairs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominoExternal {
    Outputs = 0,
    InputOutput = 1,
}

impl From<DominoExternal> for ExternalMode {
    fn from(e: DominoExternal) -> Self {
        match e {
            DominoExternal::Outputs => ExternalMode::Outputs,
            DominoExternal::InputOutput => ExternalMode::InputOutput,
        }
    }
}

/// Opaque machine handle.
pub struct DominoMachine {
    inner: StateMachine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DominoStatus {
    match e {
        Error::Parse(_) | Error::Duplicate(_) | Error::InvalidSymbol(_) | Error::UnknownState(_) => DominoStatus::Parse,
        Error::UnknownInput(_) | Error::UnknownOutput(_) => DominoStatus::Parse,
        Error::NotAccepted(_) => DominoStatus::NotAccepted,
        Error::IncompatibleAlphabets(_) => DominoStatus::IncompatibleAlphabets,
        Error::InvalidSpec(_) | Error::InvalidPartition(_) | Error::MalformedRelation(_) => DominoStatus::InvalidArgument,
        Error::DigestMismatch { .. } => DominoStatus::InvalidArgument,
    }
}

struct Failure(DominoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any failure or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DominoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            DominoStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            DominoStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(DominoStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn handle<'a>(p: *const DominoMachine, what: &str) -> Result<&'a StateMachine, Failure> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DominoStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(DominoStatus::Internal, "string holds a NUL byte".to_string()))?;
    put(out, c.into_raw(), "out")
}

unsafe fn put_machine(out: *mut *mut DominoMachine, q: StateMachine) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(DominoMachine { inner: q })));
    Ok(())
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure(DominoStatus::Internal, e.to_string()))
}

/// Parses a machine from its JSON form. On success `*out` holds a new handle
/// to release with [`domino_machine_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_machine_from_json(json: *const c_char, out: *mut *mut DominoMachine) -> DominoStatus {
    guard(|| {
        let q = StateMachine::from_json(text(json, "json")?)?;
        put_machine(out, q)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `machine` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn domino_machine_free(machine: *mut DominoMachine) {
    if !machine.is_null() {
        drop(Box::from_raw(machine));
    }
}

/// Writes the machine as compact JSON to `*out`.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_machine_to_json(machine: *const DominoMachine, out: *mut *mut c_char) -> DominoStatus {
    guard(|| put_string(out, handle(machine, "machine")?.to_json()))
}

/// Writes the number of states to `*out`.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_machine_num_states(machine: *const DominoMachine, out: *mut usize) -> DominoStatus {
    guard(|| put(out, handle(machine, "machine")?.num_states(), "out"))
}

/// Writes the validation report as JSON to `*out`. A machine that is not
/// accepted is a finding, not an error.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_machine_validate(machine: *const DominoMachine, out: *mut *mut c_char) -> DominoStatus {
    guard(|| put_string(out, json(&handle(machine, "machine")?.validate())?))
}

/// Builds the window abstraction of length `l` shifted by `m` and stores a
/// new handle in `*out`.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_build_window(
    machine: *const DominoMachine,
    external: DominoExternal,
    l: usize,
    m: usize,
    out: *mut *mut DominoMachine,
) -> DominoStatus {
    guard(|| {
        let q = handle(machine, "machine")?;
        let am = build_abstract_machine(q, external.into(), IntervalSpec::new(l, m)?)?;
        put_machine(out, am.machine)
    })
}

/// Builds the quotient abstraction at level `l` and stores a new handle in
/// `*out`.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_build_quotient(machine: *const DominoMachine, l: usize, out: *mut *mut DominoMachine) -> DominoStatus {
    guard(|| {
        let q = handle(machine, "machine")?;
        put_machine(out, build_quotient_machine(q, l)?.machine)
    })
}

/// Writes the predicate report for lengths `1..=l_max` as JSON to `*out`.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_report(
    machine: *const DominoMachine,
    external: DominoExternal,
    l_max: usize,
    out: *mut *mut c_char,
) -> DominoStatus {
    guard(|| {
        let r = build_report(handle(machine, "machine")?, external.into(), l_max, None)?;
        put_string(out, json(&r)?)
    })
}

/// Writes the pairwise comparison of the abstractions at length `l` as JSON
/// to `*out`.
///
/// # Safety
/// `machine` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_compare(machine: *const DominoMachine, l: usize, out: *mut *mut c_char) -> DominoStatus {
    guard(|| put_string(out, json(&compare(handle(machine, "machine")?, l)?)?))
}

/// Writes whether `right` simulates `left` to `*out`.
///
/// # Safety
/// Both handles must be live and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_simulates(
    left: *const DominoMachine,
    right: *const DominoMachine,
    external: DominoExternal,
    out: *mut bool,
) -> DominoStatus {
    guard(|| {
        let v = simulates(handle(left, "left")?, handle(right, "right")?, external.into())?;
        put(out, v, "out")
    })
}

/// Writes whether the behavior of `left` is included in that of `right` to
/// `*out`.
///
/// # Safety
/// Both handles must be live and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn domino_behavior_included(
    left: *const DominoMachine,
    right: *const DominoMachine,
    external: DominoExternal,
    out: *mut bool,
) -> DominoStatus {
    guard(|| {
        let v = behavior_included(handle(left, "left")?, handle(right, "right")?, external.into())?;
        put(out, v.included, "out")
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn domino_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn domino_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
