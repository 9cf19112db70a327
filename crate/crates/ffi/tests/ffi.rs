//! The C interface called through its exported symbols.

use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use domino_ffi::*;

fn fixture(name: &str) -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn load(name: &str) -> *mut DominoMachine {
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { domino_machine_from_json(fixture(name).as_ptr(), &mut q) }, DominoStatus::Ok);
    assert!(!q.is_null());
    q
}

fn take_string(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { domino_string_free(s) };
    out
}

fn last_error() -> Option<String> {
    let p = domino_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string())
}

fn states(q: *const DominoMachine) -> usize {
    let mut n = 0;
    assert_eq!(unsafe { domino_machine_num_states(q, &mut n) }, DominoStatus::Ok);
    n
}

#[test]
fn load_validate_and_round_trip() {
    let q = load("branching_cycle.json");
    assert_eq!(states(q), 5);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { domino_machine_validate(q, &mut s) }, DominoStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
    assert_eq!(v["accepted"], true);
    assert_eq!(unsafe { domino_machine_to_json(q, &mut s) }, DominoStatus::Ok);
    let json = CString::new(take_string(s)).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { domino_machine_from_json(json.as_ptr(), &mut back) }, DominoStatus::Ok);
    assert_eq!(states(back), 5);
    assert!(last_error().is_none());
    unsafe {
        domino_machine_free(back);
        domino_machine_free(q);
    }
}

#[test]
fn abstractions_and_relations() {
    let q = load("branching_cycle.json");
    let mut past = ptr::null_mut();
    let mut fut = ptr::null_mut();
    let mut quo = ptr::null_mut();
    unsafe {
        assert_eq!(domino_build_window(q, DominoExternal::Outputs, 1, 0, &mut past), DominoStatus::Ok);
        assert_eq!(domino_build_window(q, DominoExternal::Outputs, 2, 2, &mut fut), DominoStatus::Ok);
        assert_eq!(domino_build_quotient(q, 2, &mut quo), DominoStatus::Ok);
    }
    assert_eq!((states(past), states(fut), states(quo)), (5, 6, 5));
    let mut flag = false;
    unsafe {
        assert_eq!(domino_simulates(fut, quo, DominoExternal::Outputs, &mut flag), DominoStatus::Ok);
        assert!(flag);
        assert_eq!(domino_simulates(quo, fut, DominoExternal::Outputs, &mut flag), DominoStatus::Ok);
        assert!(!flag);
        assert_eq!(domino_behavior_included(q, past, DominoExternal::Outputs, &mut flag), DominoStatus::Ok);
        assert!(flag);
        for m in [past, fut, quo, q] {
            domino_machine_free(m);
        }
    }
}

#[test]
fn report_and_compare_as_json() {
    let q = load("branching_cycle.json");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { domino_report(q, DominoExternal::Outputs, 2, &mut s) }, DominoStatus::Ok);
    let r: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
    assert_eq!(r["levels"][1]["fixed_point"], true);
    assert_eq!(unsafe { domino_compare(q, 2, &mut s) }, DominoStatus::Ok);
    let c: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
    assert_eq!(c["chain"], "window(2,2) < quotient(2) < window(2,0), quotient(2) ~= source");
    unsafe { domino_machine_free(q) };
}

#[test]
fn error_codes_and_messages() {
    let mut q = ptr::null_mut();
    let bad = CString::new("{ not json").unwrap();
    assert_eq!(unsafe { domino_machine_from_json(bad.as_ptr(), &mut q) }, DominoStatus::Parse);
    assert!(q.is_null());
    assert!(last_error().unwrap().contains("parse"));
    assert_eq!(unsafe { domino_machine_from_json(ptr::null(), &mut q) }, DominoStatus::NullPointer);

    let cycle = load("branching_cycle.json");
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(domino_build_window(cycle, DominoExternal::Outputs, 1, 2, &mut out), DominoStatus::InvalidArgument);
        assert!(last_error().unwrap().contains("interval"));
        assert_eq!(domino_build_quotient(cycle, 1, ptr::null_mut()), DominoStatus::NullPointer);
        assert_eq!(domino_machine_num_states(ptr::null(), &mut 0), DominoStatus::NullPointer);
    }

    let dead = CString::new(r#"{"states":["a","b"],"inputs":["u"],"outputs":["y"],"initial":["a"],"transitions":[["a","u","y","b"]]}"#).unwrap();
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(domino_machine_from_json(dead.as_ptr(), &mut d), DominoStatus::Ok);
        assert_eq!(domino_build_quotient(d, 1, &mut out), DominoStatus::NotAccepted);
        let mut flag = false;
        let other = load("self_loop.json");
        assert_eq!(domino_simulates(cycle, other, DominoExternal::Outputs, &mut flag), DominoStatus::IncompatibleAlphabets);
        domino_machine_free(other);
        domino_machine_free(d);
        domino_machine_free(cycle);
        domino_machine_free(ptr::null_mut());
        domino_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/domino.h")).unwrap();
    for name in ["DominoMachine", "domino_machine_from_json", "domino_last_error", "DOMINO_STATUS_NOT_ACCEPTED"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let status = std::process::Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".to_string()))
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/uses_header.c"))
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
}
