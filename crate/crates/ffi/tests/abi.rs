use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use dak_ffi::*;

const LINE: &str = r#"{"seller_neighbors":[0],"buyers":[{"id":0,"valuation":2,"neighbors":[1]},{"id":1,"valuation":10,"neighbors":[]}]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { dak_string_free(s) };
    text
}

fn last_error() -> String {
    let p = dak_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn load(json: &str) -> *mut DakInstance {
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { dak_instance_from_json(c(json).as_ptr(), &mut inst) }, DakStatus::Ok);
    inst
}

#[test]
fn run_line_through_the_abi() {
    let inst = load(LINE);
    assert_eq!(unsafe { dak_instance_buyer_count(inst) }, 2);
    let mut out = ptr::null_mut();
    let status = unsafe { dak_run(inst, c("efficient").as_ptr(), c("optimal").as_ptr(), &mut out) };
    assert_eq!(status, DakStatus::Ok);
    assert_eq!(unsafe { dak_outcome_winner(out) }, 1);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(dak_outcome_revenue(out, &mut s), DakStatus::Ok);
        assert_eq!(take(s), "-8");
        assert_eq!(dak_outcome_welfare(out, &mut s), DakStatus::Ok);
        assert_eq!(take(s), "10");
        assert_eq!(dak_outcome_payment(out, 0, &mut s), DakStatus::Ok);
        assert_eq!(take(s), "-10");
        assert_eq!(dak_outcome_payment(out, 7, &mut s), DakStatus::OutOfRange);
        assert_eq!(dak_outcome_to_json(out, &mut s), DakStatus::Ok);
    }
    let json: serde_json::Value = serde_json::from_str(&take(s)).unwrap();
    assert_eq!(json["revenue"], "-8");
    unsafe {
        dak_outcome_free(out);
        dak_instance_free(inst);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut inst = ptr::null_mut();
    let status = unsafe { dak_instance_from_json(c("{\"seller_neighbors\": [0,").as_ptr(), &mut inst) };
    assert_eq!(status, DakStatus::InvalidInstance);
    assert!(inst.is_null());
    assert!(last_error().contains("line 1"));
    assert_eq!(unsafe { dak_instance_from_json(ptr::null(), &mut inst) }, DakStatus::NullPointer);

    let bad = [0xffu8, 0];
    let status = unsafe { dak_instance_from_json(bad.as_ptr().cast(), &mut inst) };
    assert_eq!(status, DakStatus::InvalidUtf8);

    let inst = load(LINE);
    let mut out = ptr::null_mut();
    let status = unsafe { dak_run(inst, c("nope").as_ptr(), c("optimal").as_ptr(), &mut out) };
    assert_eq!(status, DakStatus::UnknownName);
    assert!(last_error().contains("nope"));
    let status = unsafe { dak_run(inst, c("needs-diffusion").as_ptr(), c("optimal").as_ptr(), &mut out) };
    assert_eq!(status, DakStatus::Mechanism);
    let status = unsafe { dak_run(inst, c("efficient").as_ptr(), c("alpha:-1").as_ptr(), &mut out) };
    assert_eq!(status, DakStatus::InvalidConfig);
    assert!(out.is_null());
    assert_eq!(unsafe { dak_outcome_winner(ptr::null()) }, -1);
    assert_eq!(unsafe { dak_instance_buyer_count(ptr::null()) }, 0);
    unsafe {
        dak_instance_free(inst);
        dak_instance_free(ptr::null_mut());
        dak_outcome_free(ptr::null_mut());
        dak_string_free(ptr::null_mut());
    }
}

#[test]
fn verify_certifies_and_refutes() {
    let a = load(LINE);
    let b = load(r#"{"seller_neighbors":[0,1],"buyers":[{"id":0,"valuation":3,"neighbors":[]},{"id":1,"valuation":1,"neighbors":[]}]}"#);
    let handles = [a.cast_const(), b.cast_const()];
    let verify = |payment: &str, grid: Option<&str>| {
        let grid = grid.map(c);
        let (mut json, mut certified) = (ptr::null_mut(), false);
        let status = unsafe {
            dak_verify(
                handles.as_ptr(),
                handles.len(),
                c("efficient").as_ptr(),
                c(payment).as_ptr(),
                grid.as_ref().map_or(ptr::null(), |g| g.as_ptr()),
                &mut json,
                &mut certified,
            )
        };
        (status, certified, if json.is_null() { None } else { Some(take(json)) })
    };
    let (status, certified, json) = verify("optimal", None);
    assert_eq!(status, DakStatus::Ok);
    assert!(certified);
    let report: serde_json::Value = serde_json::from_str(&json.unwrap()).unwrap();
    assert_eq!(report["instances"], 2);

    let (status, certified, _) = verify("first-price", Some("0, 1, 2, 3, 10"));
    assert_eq!(status, DakStatus::Ok);
    assert!(!certified);

    let (status, _, json) = verify("optimal", Some("1,2"));
    assert_eq!(status, DakStatus::InvalidConfig);
    assert!(json.is_none());
    unsafe {
        dak_instance_free(a);
        dak_instance_free(b);
    }
}

#[test]
fn instance_json_round_trips() {
    let inst = load(LINE);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { dak_instance_to_json(inst, &mut s) }, DakStatus::Ok);
    let again = load(&take(s));
    assert_eq!(unsafe { dak_instance_buyer_count(again) }, 2);
    unsafe {
        dak_instance_free(inst);
        dak_instance_free(again);
    }
}

/// Compiles and links a C program against the generated header and the
/// static library, then runs it.
#[test]
fn c_program_links_against_header() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libdak_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        format!(
            r#"#include "dak.h"
#include <stdio.h>
#include <string.h>
int main(void) {{
    DakInstance *inst = NULL;
    if (dak_instance_from_json({json:?}, &inst) != DAK_STATUS_OK) return 2;
    DakOutcome *out = NULL;
    if (dak_run(inst, "efficient", "optimal", &out) != DAK_STATUS_OK) return 3;
    char *revenue = NULL;
    dak_outcome_revenue(out, &revenue);
    int ok = strcmp(revenue, "-8") == 0 && dak_outcome_winner(out) == 1;
    if (dak_run(inst, "bogus", "optimal", &out) != DAK_STATUS_UNKNOWN_NAME) ok = 0;
    printf("%s %s\n", revenue, dak_last_error_message());
    dak_string_free(revenue);
    dak_outcome_free(out);
    dak_instance_free(inst);
    return ok ? 0 : 1;
}}
"#,
            json = LINE
        ),
    )
    .unwrap();
    let exe = dir.path().join("main");
    let cc = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}");
    assert!(stdout.starts_with("-8 unknown allocation policy `bogus`"), "{stdout}");
}
