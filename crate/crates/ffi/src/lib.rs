//! C interface to the verification suites.
//!
//! Every function returns an [`SdymStatus`]; results come back through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free` function. The message for the most recent failure on the calling
//! thread is available from [`sdym_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use sdym_core::cli_report::{all_pass, run, to_jsonl, CheckReport, RunConfig, Suite};
use sdym_core::gauge_field::{bpst_instanton, probe_points, sdym_residual, AnalyticField, GaugePotential};
use sdym_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdymStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    ComputeError = 4,
    BufferTooSmall = 5,
    OutOfRange = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdymSuite {
    Sdym = 0,
    Manifest = 1,
    Hidden = 2,
    Rh = 3,
    All = 4,
}

impl From<SdymSuite> for Suite {
    fn from(s: SdymSuite) -> Self {
        match s {
            SdymSuite::Sdym => Suite::Sdym,
            SdymSuite::Manifest => Suite::Manifest,
            SdymSuite::Hidden => Suite::Hidden,
            SdymSuite::Rh => Suite::Rh,
            SdymSuite::All => Suite::All,
        }
    }
}

/// Run configuration handle.
pub struct SdymConfig {
    inner: RunConfig,
}

/// Report handle: check results sorted by id.
pub struct SdymReport {
    reports: Vec<CheckReport>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: SdymStatus, msg: impl Into<String>) -> SdymStatus {
    set_error(msg);
    status
}

fn from_core(e: Error) -> SdymStatus {
    let status = match e {
        Error::Config(_) => SdymStatus::ConfigError,
        Error::InvalidParameter(_) => SdymStatus::InvalidArgument,
        _ => SdymStatus::ComputeError,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SdymStatus) -> SdymStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(SdymStatus::Panic, "internal panic"))
}

/// Copies `text` plus a NUL terminator into `buf`. `needed` receives the
/// byte count including the terminator, also when the buffer is too small.
/// A short buffer leaves the stored error message untouched.
unsafe fn write_string(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> SdymStatus {
    let len = text.len() + 1;
    if !needed.is_null() {
        *needed = len;
    }
    if buf.is_null() || cap < len {
        return SdymStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    SdymStatus::Ok
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sdym_status_str(status: SdymStatus) -> *const c_char {
    let s: &'static CStr = match status {
        SdymStatus::Ok => c"ok",
        SdymStatus::NullPointer => c"null pointer",
        SdymStatus::InvalidArgument => c"invalid argument",
        SdymStatus::ConfigError => c"configuration error",
        SdymStatus::ComputeError => c"computation error",
        SdymStatus::BufferTooSmall => c"buffer too small",
        SdymStatus::OutOfRange => c"index out of range",
        SdymStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message of the most recent failure on this thread.
/// `buf` must be valid for `cap` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn sdym_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> SdymStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    write_string(&msg, buf, cap, needed)
}

/// Default configuration.
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sdym_config_new(out: *mut *mut SdymConfig) -> SdymStatus {
    if out.is_null() {
        return fail(SdymStatus::NullPointer, "out is null");
    }
    *out = Box::into_raw(Box::new(SdymConfig {
        inner: RunConfig::default(),
    }));
    SdymStatus::Ok
}

/// Configuration from a JSON document; missing fields take defaults.
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sdym_config_from_json(json: *const c_char, out: *mut *mut SdymConfig) -> SdymStatus {
    if json.is_null() || out.is_null() {
        return fail(SdymStatus::NullPointer, "json or out is null");
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        return fail(SdymStatus::InvalidArgument, "json is not UTF-8");
    };
    guard(|| match RunConfig::from_json(text) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SdymConfig { inner }));
            SdymStatus::Ok
        }
        Err(e) => from_core(e),
    })
}

/// `cfg` must come from `sdym_config_new` or `sdym_config_from_json`, or be null.
#[no_mangle]
pub unsafe extern "C" fn sdym_config_free(cfg: *mut SdymConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn with_config(cfg: *mut SdymConfig, f: impl FnOnce(&mut RunConfig)) -> SdymStatus {
    match cfg.as_mut() {
        Some(c) => {
            f(&mut c.inner);
            SdymStatus::Ok
        }
        None => fail(SdymStatus::NullPointer, "config is null"),
    }
}

/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn sdym_config_set_seed(cfg: *mut SdymConfig, seed: u64) -> SdymStatus {
    with_config(cfg, |c| c.seed = seed)
}

/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn sdym_config_set_orders(cfg: *mut SdymConfig, jet_order: i32, lambda_order: u32) -> SdymStatus {
    with_config(cfg, |c| {
        c.jet_order = jet_order;
        c.lambda_order = lambda_order as usize;
    })
}

/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn sdym_config_set_tolerance_scale(cfg: *mut SdymConfig, scale: f64) -> SdymStatus {
    with_config(cfg, |c| c.tolerance_scale = scale)
}

/// Checks the configuration without running anything.
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn sdym_config_validate(cfg: *const SdymConfig) -> SdymStatus {
    match cfg.as_ref() {
        Some(c) => c.inner.validate().map_or_else(from_core, |_| SdymStatus::Ok),
        None => fail(SdymStatus::NullPointer, "config is null"),
    }
}

/// Runs a suite. On success `*out` owns a report handle.
/// `cfg` must be a live config handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sdym_run(cfg: *const SdymConfig, suite: SdymSuite, out: *mut *mut SdymReport) -> SdymStatus {
    let (Some(c), false) = (cfg.as_ref(), out.is_null()) else {
        return fail(SdymStatus::NullPointer, "config or out is null");
    };
    guard(|| match run(suite.into(), &c.inner) {
        Ok(reports) => {
            *out = Box::into_raw(Box::new(SdymReport { reports }));
            SdymStatus::Ok
        }
        Err(e) => from_core(e),
    })
}

/// `report` must come from `sdym_run`, or be null.
#[no_mangle]
pub unsafe extern "C" fn sdym_report_free(report: *mut SdymReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// `report` must be a live report handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sdym_report_len(report: *const SdymReport, len: *mut usize) -> SdymStatus {
    match (report.as_ref(), len.is_null()) {
        (Some(r), false) => {
            *len = r.reports.len();
            SdymStatus::Ok
        }
        _ => fail(SdymStatus::NullPointer, "report or len is null"),
    }
}

/// `report` must be a live report handle and `pass` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sdym_report_all_pass(report: *const SdymReport, pass: *mut bool) -> SdymStatus {
    match (report.as_ref(), pass.is_null()) {
        (Some(r), false) => {
            *pass = all_pass(&r.reports);
            SdymStatus::Ok
        }
        _ => fail(SdymStatus::NullPointer, "report or pass is null"),
    }
}

unsafe fn entry<'a>(report: *const SdymReport, index: usize) -> Result<&'a CheckReport, SdymStatus> {
    let r = report.as_ref().ok_or_else(|| fail(SdymStatus::NullPointer, "report is null"))?;
    r.reports
        .get(index)
        .ok_or_else(|| fail(SdymStatus::OutOfRange, format!("index {index} of {}", r.reports.len())))
}

/// Residual, tolerance and verdict of one check.
/// `report` must be a live report handle; out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn sdym_report_entry(
    report: *const SdymReport,
    index: usize,
    residual: *mut f64,
    tolerance: *mut f64,
    pass: *mut bool,
) -> SdymStatus {
    match entry(report, index) {
        Ok(e) => {
            if !residual.is_null() {
                *residual = e.residual;
            }
            if !tolerance.is_null() {
                *tolerance = e.tolerance;
            }
            if !pass.is_null() {
                *pass = e.pass;
            }
            SdymStatus::Ok
        }
        Err(s) => s,
    }
}

/// Check id of one entry as a NUL-terminated string.
/// `report` must be a live report handle, `buf` valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn sdym_report_check_id(
    report: *const SdymReport,
    index: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> SdymStatus {
    match entry(report, index) {
        Ok(e) => write_string(&e.check_id, buf, cap, needed),
        Err(s) => s,
    }
}

/// The whole report in JSON Lines form.
/// `report` must be a live report handle, `buf` valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn sdym_report_jsonl(
    report: *const SdymReport,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> SdymStatus {
    match report.as_ref() {
        Some(r) => write_string(&to_jsonl(&r.reports), buf, cap, needed),
        None => fail(SdymStatus::NullPointer, "report is null"),
    }
}

/// Anti-self-dual part of the SU(2) instanton curvature at seeded probes in
/// a ball of radius `2·scale` around `center`.
/// `center` must point to 4 doubles and `residual` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sdym_bpst_residual(
    center: *const f64,
    scale: f64,
    probes: usize,
    seed: u64,
    residual: *mut f64,
) -> SdymStatus {
    if center.is_null() || residual.is_null() {
        return fail(SdymStatus::NullPointer, "center or residual is null");
    }
    let c: [f64; 4] = std::ptr::read(center as *const [f64; 4]);
    guard(|| match bpst_instanton(c, scale, 2) {
        Ok(f) => {
            let pts = probe_points(seed, probes, c, 2.0 * scale, &f.poles(), 0.1 * scale);
            *residual = sdym_residual(&GaugePotential::Analytic(Arc::new(f)), &pts);
            SdymStatus::Ok
        }
        Err(e) => from_core(e),
    })
}
