//! C ABI for the csn interpreter.
//!
//! Networks and traces are opaque heap objects owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`CsnStatus`]; on failure [`csn_last_error`] describes what went wrong.
//! Strings returned as `char *` are owned by the caller and released with
//! [`csn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use csn::congruence::{canonical_hash, canonical_network, congruent};
use csn::engine::{DeliveryPolicy, EnergyConfig};
use csn::extensions::Extensions;
use csn::network::Network;
use csn::num::Amount;
use csn::scheduler::{self, RunConfig, Trace};
use csn::syntax::{parse_network, parse_network_in};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsnStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    Config = 5,
    Engine = 6,
    Panic = 7,
}

/// A parsed network.
pub struct CsnNetwork {
    inner: Network,
}

/// The result of a run.
pub struct CsnTrace {
    inner: Trace,
}

/// Options for [`csn_run`]. Obtain defaults from [`csn_run_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CsnRunOptions {
    pub seed: u64,
    pub max_steps: u64,
    /// Cost of an internal step, in millionths of a battery unit.
    pub c_in_micros: i64,
    /// Cost of a broadcast release, in millionths of a battery unit.
    pub c_out_micros: i64,
    /// Release broadcasts before every receiver in range has the message.
    pub nondeterministic_delivery: bool,
    pub ext_state: bool,
    pub ext_events: bool,
    pub ext_nonce: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: CsnStatus, msg: impl Into<String>) -> CsnStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into [`CsnStatus::Panic`].
fn guard(f: impl FnOnce() -> CsnStatus) -> CsnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(CsnStatus::Panic, format!("internal error: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CsnStatus> {
    if s.is_null() {
        return Err(fail(CsnStatus::NullArgument, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CsnStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn energy(options: &CsnRunOptions) -> Result<EnergyConfig, CsnStatus> {
    EnergyConfig::new(Amount::from_micros(options.c_in_micros), Amount::from_micros(options.c_out_micros))
        .map_err(|e| fail(CsnStatus::Config, e.to_string()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn csn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn csn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses network source text.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csn_network_parse(source: *const c_char, out: *mut *mut CsnNetwork) -> CsnStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsnStatus::NullArgument, "out is null");
        }
        let src = match read_str(source) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_network(src) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(CsnNetwork { inner: net }));
                CsnStatus::Ok
            }
            Err(e) => fail(CsnStatus::Parse, e.to_string()),
        }
    })
}

/// Reads and parses a network file. Grid files are resolved relative to it.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csn_network_parse_file(path: *const c_char, out: *mut *mut CsnNetwork) -> CsnStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsnStatus::NullArgument, "out is null");
        }
        let path = match read_str(path) {
            Ok(s) => Path::new(s),
            Err(status) => return status,
        };
        let src = match std::fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => return fail(CsnStatus::Io, format!("{}: {e}", path.display())),
        };
        match parse_network_in(&src, path.parent()) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(CsnNetwork { inner: net }));
                CsnStatus::Ok
            }
            Err(e) => fail(CsnStatus::Parse, format!("{}:{e}", path.display())),
        }
    })
}

/// Releases a network. Null is ignored.
///
/// # Safety
/// `net` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn csn_network_free(net: *mut CsnNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of live sensors, including those captured in a broadcast.
/// Returns 0 for null.
///
/// # Safety
/// `net` must be null or a live network.
#[no_mangle]
pub unsafe extern "C" fn csn_network_sensor_count(net: *const CsnNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.all_sensors().len())
}

/// Sum of all batteries in millionths of a unit, counting the residue of
/// expired sensors.
///
/// # Safety
/// `net` must be a live network and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn csn_network_total_battery_micros(net: *const CsnNetwork, out: *mut i64) -> CsnStatus {
    guard(|| {
        let (Some(n), false) = (net.as_ref(), out.is_null()) else {
            return fail(CsnStatus::NullArgument, "null argument");
        };
        *out = n.inner.total_battery().micros();
        CsnStatus::Ok
    })
}

/// Canonical form of a network under the given energy costs. Free the result
/// with [`csn_string_free`]. Returns null on error.
///
/// # Safety
/// `net` and `options` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn csn_network_canonical(net: *const CsnNetwork, options: *const CsnRunOptions) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let (Some(n), Some(o)) = (net.as_ref(), options.as_ref()) else {
            return fail(CsnStatus::NullArgument, "null argument");
        };
        match energy(o) {
            Ok(e) => {
                result = to_c_string(canonical_network(&n.inner, &e));
                CsnStatus::Ok
            }
            Err(status) => status,
        }
    });
    result
}

/// Stable 64-bit hash of the canonical form.
///
/// # Safety
/// `net`, `options` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn csn_network_hash(
    net: *const CsnNetwork,
    options: *const CsnRunOptions,
    out: *mut u64,
) -> CsnStatus {
    guard(|| {
        let (Some(n), Some(o), false) = (net.as_ref(), options.as_ref(), out.is_null()) else {
            return fail(CsnStatus::NullArgument, "null argument");
        };
        match energy(o) {
            Ok(e) => {
                *out = canonical_hash(&n.inner, &e);
                CsnStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Structural congruence of two networks.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn csn_network_congruent(
    a: *const CsnNetwork,
    b: *const CsnNetwork,
    options: *const CsnRunOptions,
    out: *mut bool,
) -> CsnStatus {
    guard(|| {
        let (Some(a), Some(b), Some(o), false) = (a.as_ref(), b.as_ref(), options.as_ref(), out.is_null()) else {
            return fail(CsnStatus::NullArgument, "null argument");
        };
        match energy(o) {
            Ok(e) => {
                *out = congruent(&a.inner, &b.inner, &e);
                CsnStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Defaults: seed 0, 10000 steps, c_in 1, c_out 10, all-in-range delivery,
/// no extensions.
#[no_mangle]
pub extern "C" fn csn_run_options_default() -> CsnRunOptions {
    let e = EnergyConfig::default();
    CsnRunOptions {
        seed: 0,
        max_steps: 10_000,
        c_in_micros: e.c_in.micros(),
        c_out_micros: e.c_out.micros(),
        nondeterministic_delivery: false,
        ext_state: false,
        ext_events: false,
        ext_nonce: false,
    }
}

/// Runs a network with a seeded random scheduler. The network is not
/// modified.
///
/// # Safety
/// `net`, `options` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn csn_run(
    net: *const CsnNetwork,
    options: *const CsnRunOptions,
    out: *mut *mut CsnTrace,
) -> CsnStatus {
    guard(|| {
        let (Some(n), Some(o), false) = (net.as_ref(), options.as_ref(), out.is_null()) else {
            return fail(CsnStatus::NullArgument, "null argument");
        };
        let mut cfg = RunConfig::random(o.seed);
        cfg.max_steps = o.max_steps;
        cfg.config.energy = match energy(o) {
            Ok(e) => e,
            Err(status) => return status,
        };
        cfg.config.delivery = if o.nondeterministic_delivery {
            DeliveryPolicy::Nondeterministic
        } else {
            DeliveryPolicy::AllInRange
        };
        cfg.config.extensions = Extensions {
            state: o.ext_state,
            events: o.ext_events,
            nonce: o.ext_nonce,
        };
        match scheduler::run(&n.inner, &cfg) {
            Ok(trace) => {
                *out = Box::into_raw(Box::new(CsnTrace { inner: trace }));
                CsnStatus::Ok
            }
            Err(scheduler::SchedulerError::Config(msg)) => fail(CsnStatus::Config, msg),
            Err(e) => fail(CsnStatus::Engine, e.to_string()),
        }
    })
}

/// Releases a trace. Null is ignored.
///
/// # Safety
/// `trace` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn csn_trace_free(trace: *mut CsnTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of steps taken. Returns 0 for null.
///
/// # Safety
/// `trace` must be null or a live trace.
#[no_mangle]
pub unsafe extern "C" fn csn_trace_step_count(trace: *const CsnTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.steps.len())
}

/// Name of the outcome, such as `Quiescent`. The string is static. Returns
/// null for null.
///
/// # Safety
/// `trace` must be null or a live trace.
#[no_mangle]
pub unsafe extern "C" fn csn_trace_outcome(trace: *const CsnTrace) -> *const c_char {
    let Some(t) = trace.as_ref() else {
        return ptr::null();
    };
    let name: &'static CStr = match t.inner.outcome {
        scheduler::Outcome::Quiescent => c"Quiescent",
        scheduler::Outcome::QuiescentBlocked => c"QuiescentBlocked",
        scheduler::Outcome::StepLimit => c"StepLimit",
        scheduler::Outcome::AllExpired => c"AllExpired",
        scheduler::Outcome::StateLimit => c"StateLimit",
        scheduler::Outcome::ScriptEnd => c"ScriptEnd",
    };
    name.as_ptr()
}

/// The trace in the textual line format. Free with [`csn_string_free`].
///
/// # Safety
/// `trace` must be null or a live trace.
#[no_mangle]
pub unsafe extern "C" fn csn_trace_render(trace: *const CsnTrace) -> *mut c_char {
    trace.as_ref().map_or(ptr::null_mut(), |t| to_c_string(t.inner.render()))
}

/// Number of log entries written by intrinsics during the run.
///
/// # Safety
/// `trace` must be null or a live trace.
#[no_mangle]
pub unsafe extern "C" fn csn_trace_log_count(trace: *const CsnTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.last.log.len())
}

/// Copies the final network of a run into a new handle.
///
/// # Safety
/// `trace` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn csn_trace_final_network(trace: *const CsnTrace, out: *mut *mut CsnNetwork) -> CsnStatus {
    guard(|| {
        let (Some(t), false) = (trace.as_ref(), out.is_null()) else {
            return fail(CsnStatus::NullArgument, "null argument");
        };
        *out = Box::into_raw(Box::new(CsnNetwork { inner: t.inner.last.clone() }));
        CsnStatus::Ok
    })
}

/// Battery drop of the run in millionths of a unit.
///
/// # Safety
/// `trace` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn csn_trace_energy_spent_micros(trace: *const CsnTrace, out: *mut i64) -> CsnStatus {
    guard(|| {
        let (Some(t), false) = (trace.as_ref(), out.is_null()) else {
            return fail(CsnStatus::NullArgument, "null argument");
        };
        *out = (t.inner.initial.total_battery() - t.inner.last.total_battery()).micros();
        CsnStatus::Ok
    })
}
