use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use qdede_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { qd_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qd_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn rational_context_round_trip() {
    let q = CString::new("2").unwrap();
    let mut ctx = ptr::null_mut();
    assert_eq!(unsafe { qd_context_new_rational(q.as_ptr(), 1, &mut ctx) }, QD_OK);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qd_g_number(ctx, 1, &mut out) }, QD_OK);
    assert_eq!(take(out), "3/2");
    assert_eq!(unsafe { qd_g_number(ctx, 2, &mut out) }, QD_OK);
    assert_eq!(take(out), "-1");
    assert_eq!(unsafe { qd_g_poly_scaled(ctx, 1, 1, 1, &mut out) }, QD_OK);
    assert_eq!(take(out), "3/2");
    assert_eq!(unsafe { qd_y_tilde(ctx, 3, 1, 1, 1, &mut out) }, QD_OK);
    assert_eq!(take(out), "0");
    unsafe { qd_context_free(ctx) };
}

#[test]
fn dc_sum_and_errors() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qd_dc_sum(1, 1, 3, &mut out) }, QD_OK);
    assert_eq!(take(out), "-1/6");
    assert_eq!(unsafe { qd_dc_sum(1, 2, 4, &mut out) }, QD_ERR_PARAM);
    assert!(last_error().contains("gcd(2, 4)"));
    assert_eq!(unsafe { qd_dc_sum(1, 1, 3, ptr::null_mut()) }, QD_ERR_NULL);
    assert_eq!(unsafe { qd_g_number(ptr::null(), 1, &mut out) }, QD_ERR_NULL);
}

#[test]
fn degenerate_and_invalid_contexts() {
    let mut ctx = ptr::null_mut();
    let one = CString::new("1").unwrap();
    assert_eq!(unsafe { qd_context_new_rational(one.as_ptr(), 1, &mut ctx) }, QD_ERR_ARITH);
    let bad = CString::new("two").unwrap();
    assert_eq!(unsafe { qd_context_new_rational(bad.as_ptr(), 1, &mut ctx) }, QD_ERR_PARAM);
    let q = CString::new("2").unwrap();
    assert_eq!(unsafe { qd_context_new_padic(5, q.as_ptr(), 1, 8, &mut ctx) }, QD_ERR_PARAM);
    assert!(ctx.is_null());
    unsafe { qd_context_free(ptr::null_mut()) };
    unsafe { qd_string_free(ptr::null_mut()) };
}

#[test]
fn padic_dedekind_sum_is_exact_and_literal_differs() {
    let q = CString::new("8").unwrap();
    let mut ctx = ptr::null_mut();
    assert_eq!(unsafe { qd_context_new_padic(7, q.as_ptr(), 1, 8, &mut ctx) }, QD_OK);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qd_dc_padic(ctx, 5, 1, 5, &mut out) }, QD_OK);
    let dc = take(out);
    assert!(dc.contains('/'), "expected an exact rational, got {dc}");
    assert_eq!(unsafe { qd_context_set_literal(ctx, true) }, QD_OK);
    assert_eq!(unsafe { qd_dc_padic(ctx, 5, 1, 5, &mut out) }, QD_OK);
    assert_ne!(take(out), dc);
    unsafe { qd_context_free(ctx) };
}

#[test]
fn verify_writes_json() {
    let suites = CString::new("dcsum,measure").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qd_verify(suites.as_ptr(), 7, &mut out) }, QD_OK);
    let json = take(out);
    assert!(json.trim_start().starts_with('['));
    assert!(json.contains("\"suite\": \"dcsum\""));
    let unknown = CString::new("nope").unwrap();
    assert_eq!(unsafe { qd_verify(unknown.as_ptr(), 0, &mut out) }, QD_ERR_PARAM);
}

#[test]
fn status_messages() {
    for code in [QD_OK, QD_ERR_NULL, QD_ERR_UTF8, QD_ERR_PARAM, QD_ERR_ARITH, QD_ERR_VERIFY, QD_ERR_INTERNAL] {
        assert!(!qd_status_message(code).is_null());
    }
    assert!(qd_status_message(99).is_null());
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qdede.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "qd_context_new_rational",
        "qd_context_new_padic",
        "qd_context_set_literal",
        "qd_context_free",
        "qd_g_number",
        "qd_g_poly_scaled",
        "qd_dc_sum",
        "qd_y_tilde",
        "qd_dc_padic",
        "qd_verify",
        "qd_string_free",
        "qd_last_error",
        "qd_status_message",
        "typedef struct QdContext QdContext",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

/// Compiles and runs a small C client against the static library, when a C
/// compiler and the archive are available.
#[test]
fn c_client_links_and_runs() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let archive = deps.parent().unwrap().join("libqdede_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !archive.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {} not built", archive.display());
        return;
    }
    let dir = std::env::temp_dir().join(format!("qdede-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("client.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "qdede.h"
int main(void) {
    char *out = NULL;
    if (qd_dc_sum(1, 1, 3, &out) != QD_OK) return 1;
    printf("%s\n", out);
    qd_string_free(out);
    QdContext *ctx = NULL;
    if (qd_context_new_rational("2/3", 2, &ctx) != QD_OK) return 2;
    if (qd_g_number(ctx, 1, &out) != QD_OK) return 3;
    printf("%s\n", out);
    qd_string_free(out);
    qd_context_free(ctx);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.join("client");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C client failed to compile");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success());
    // G~_1 = (1 + q)/2 = 5/6 at q = 2/3.
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "-1/6\n5/6\n");
    let _ = std::fs::remove_dir_all(&dir);
}
