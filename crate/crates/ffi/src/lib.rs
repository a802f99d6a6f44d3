//! C ABI over `qdede`.
//!
//! Every fallible call returns an `int32_t` status (`QD_OK` on success) and
//! writes its result through an out-pointer. Strings handed out by the
//! library are owned by the caller and must be released with
//! `qd_string_free`. The message for the most recent failure on the calling
//! thread is available from `qd_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdede::dedekind::{dc_sum, DCSumParams};
use qdede::genocchi::{g_number, g_poly_scaled};
use qdede::interp::{dc_padic, y_tilde, YParams};
use qdede::report::to_json;
use qdede::verify::{parse_suites, run_suites, VerifyConfig};
use qdede::{Error, QContext, Rat, Scalar};

pub const QD_OK: i32 = 0;
/// A required pointer argument was null.
pub const QD_ERR_NULL: i32 = 1;
/// A string argument was not valid UTF-8.
pub const QD_ERR_UTF8: i32 = 2;
/// Invalid parameters or context.
pub const QD_ERR_PARAM: i32 = 3;
/// Arithmetic breakdown (division by zero, degenerate q, no convergence).
pub const QD_ERR_ARITH: i32 = 4;
/// A verification run completed with at least one failing check.
pub const QD_ERR_VERIFY: i32 = 5;
/// The library panicked; this is a bug.
pub const QD_ERR_INTERNAL: i32 = 6;

/// Opaque computation context.
pub struct QdContext {
    inner: QContext,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> i32 {
    match e {
        Error::DivideByZero | Error::DegenerateQ(_) | Error::NoConvergence { .. } | Error::NotOneUnit => QD_ERR_ARITH,
        _ => QD_ERR_PARAM,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QD_OK,
        Ok(Err((code, msg))) => {
            set_last_error(&msg);
            code
        }
        Err(_) => {
            set_last_error("internal panic");
            QD_ERR_INTERNAL
        }
    }
}

fn lib_err(e: Error) -> (i32, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (i32, String)> {
    if s.is_null() {
        return Err((QD_ERR_NULL, "null string argument".into()));
    }
    // SAFETY: caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| (QD_ERR_UTF8, "string argument is not UTF-8".into()))
}

unsafe fn write_str(out: *mut *mut c_char, s: String) -> Result<(), (i32, String)> {
    if out.is_null() {
        return Err((QD_ERR_NULL, "null output pointer".into()));
    }
    let c = CString::new(s).map_err(|_| (QD_ERR_INTERNAL, "interior NUL in output".into()))?;
    // SAFETY: checked non-null above; the caller provides writable storage.
    unsafe { *out = c.into_raw() };
    Ok(())
}

unsafe fn context<'a>(ctx: *const QdContext) -> Result<&'a QContext, (i32, String)> {
    if ctx.is_null() {
        return Err((QD_ERR_NULL, "null context".into()));
    }
    // SAFETY: non-null handles come from qd_context_new_*.
    Ok(unsafe { &(*ctx).inner })
}

unsafe fn write_ctx(out: *mut *mut QdContext, inner: QContext) -> Result<(), (i32, String)> {
    if out.is_null() {
        return Err((QD_ERR_NULL, "null output pointer".into()));
    }
    // SAFETY: checked non-null above.
    unsafe { *out = Box::into_raw(Box::new(QdContext { inner })) };
    Ok(())
}

/// Creates a rational-mode context. `q` is `"n"` or `"n/d"`.
///
/// # Safety
/// `q` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_context_new_rational(q: *const c_char, alpha: u32, out: *mut *mut QdContext) -> i32 {
    guard(|| {
        let q: Rat = unsafe { read_str(q) }?.parse().map_err(lib_err)?;
        let ctx = QContext::rational(q, alpha).map_err(lib_err)?;
        unsafe { write_ctx(out, ctx) }
    })
}

/// Creates a p-adic context for the odd prime `p` with an exact rational `q`
/// satisfying `|1 - q|_p < 1`.
///
/// # Safety
/// `q` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_context_new_padic(
    p: u64,
    q: *const c_char,
    alpha: u32,
    precision: u32,
    out: *mut *mut QdContext,
) -> i32 {
    guard(|| {
        let q: Rat = unsafe { read_str(q) }?.parse().map_err(lib_err)?;
        let ctx = QContext::padic(p, q, alpha, precision).map_err(lib_err)?;
        unsafe { write_ctx(out, ctx) }
    })
}

/// Switches the interpolation sums to the alternative printed summand.
///
/// # Safety
/// `ctx` must come from `qd_context_new_*` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn qd_context_set_literal(ctx: *mut QdContext, on: bool) -> i32 {
    guard(|| {
        if ctx.is_null() {
            return Err((QD_ERR_NULL, "null context".into()));
        }
        // SAFETY: non-null handle from qd_context_new_*.
        let c = unsafe { &mut *ctx };
        c.inner = c.inner.clone().with_literal_mode(on);
        Ok(())
    })
}

/// Releases a context. Null is ignored.
///
/// # Safety
/// `ctx` must come from `qd_context_new_*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qd_context_free(ctx: *mut QdContext) {
    if !ctx.is_null() {
        // SAFETY: the handle was created by Box::into_raw.
        drop(unsafe { Box::from_raw(ctx) });
    }
}

fn render(v: &Scalar) -> String {
    v.to_string()
}

/// `G~_n` as text (`"n/d"` or a p-adic expansion).
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_g_number(ctx: *const QdContext, n: u64, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let v = g_number(n, unsafe { context(ctx) }?).map_err(lib_err)?;
        unsafe { write_str(out, render(&v)) }
    })
}

/// `G~_{n, q^N}(a/N)`.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_g_poly_scaled(
    ctx: *const QdContext,
    n: u64,
    a: i64,
    big_n: u32,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let v = g_poly_scaled(n, a, big_n, unsafe { context(ctx) }?).map_err(lib_err)?;
        unsafe { write_str(out, render(&v)) }
    })
}

/// `S_m(h,k)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_dc_sum(m: u64, h: u64, k: u64, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let v = DCSumParams::new(m, h, k).and_then(dc_sum).map_err(lib_err)?;
        unsafe { write_str(out, v.to_string()) }
    })
}

/// `Y~_m(h,k : q^l)`.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_y_tilde(
    ctx: *const QdContext,
    m: u64,
    h: u64,
    k: u64,
    l: u64,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let ctx = unsafe { context(ctx) }?;
        let v = YParams::new(m, h, k, l).and_then(|p| y_tilde(p, ctx)).map_err(lib_err)?;
        unsafe { write_str(out, render(&v)) }
    })
}

/// p-adic Dedekind-type sum `sum_M (-1)^(M-1) [M] A~(m, (hM)_k, k)`.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_dc_padic(ctx: *const QdContext, m: u64, h: u64, k: u64, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let v = dc_padic(m, h, k, unsafe { context(ctx) }?).map_err(lib_err)?;
        unsafe { write_str(out, render(&v)) }
    })
}

/// Runs the comma-separated `suites` (or `"all"`) and writes the JSON
/// report array to `out_json`. Returns `QD_ERR_VERIFY` if any check fails;
/// the report is written in that case too.
///
/// # Safety
/// `suites` must be a NUL-terminated string and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_verify(suites: *const c_char, seed: u64, out_json: *mut *mut c_char) -> i32 {
    let mut failed = false;
    let status = guard(|| {
        let list = parse_suites(unsafe { read_str(suites) }?).map_err(lib_err)?;
        let cfg = VerifyConfig { seed, ..VerifyConfig::default() };
        let reports = run_suites(&list, &cfg);
        failed = reports.iter().any(|r| r.failed());
        unsafe { write_str(out_json, to_json(&reports)) }
    });
    if status == QD_OK && failed {
        set_last_error("verification failed");
        return QD_ERR_VERIFY;
    }
    status
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qd_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: the string was created by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message for the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qd_status_message(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        QD_OK => c"ok",
        QD_ERR_NULL => c"null pointer argument",
        QD_ERR_UTF8 => c"string argument is not UTF-8",
        QD_ERR_PARAM => c"invalid parameter or context",
        QD_ERR_ARITH => c"arithmetic failure",
        QD_ERR_VERIFY => c"verification failed",
        QD_ERR_INTERNAL => c"internal error",
        _ => return ptr::null(),
    };
    s.as_ptr()
}
