//! C ABI over `wlgt-core`.
//!
//! Graphs live behind opaque handles. Every call returns a [`WlgtStatus`];
//! on failure the message is available from [`wlgt_last_error_message`] on
//! the same thread. Strings handed out must be released with
//! [`wlgt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wlgt_core::graph::{builtin_pair, load_graph};
use wlgt_core::sim::{simulate_and_compare, SimConfig};
use wlgt_core::wl::{distinguish, refine_to_stable, ColoringReport, Variant};
use wlgt_core::{Error, Graph};

/// Opaque graph handle.
pub struct WlgtGraph {
    inner: Graph,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlgtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed graph, unknown pair, invalid order or variant mismatch.
    InvalidInput = 3,
    /// Size, memory or iteration cap exceeded.
    ResourceLimit = 4,
    /// A verification ran but did not pass.
    Failed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WlgtVariant {
    Kwl = 0,
    DeltaKwl = 1,
    DeltaKlwl = 2,
    KsLwl = 3,
}

impl From<WlgtVariant> for Variant {
    fn from(v: WlgtVariant) -> Self {
        match v {
            WlgtVariant::Kwl => Variant::Kwl,
            WlgtVariant::DeltaKwl => Variant::DeltaKwl,
            WlgtVariant::DeltaKlwl => Variant::DeltaKlwl,
            WlgtVariant::KsLwl => Variant::KsLwl,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WlgtVerdict {
    pub distinguished: bool,
    /// First iteration whose histograms differ, or -1.
    pub at_iteration: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn fail(status: WlgtStatus, message: String) -> WlgtStatus {
    set_last_error(message);
    status
}

fn from_error(e: &Error) -> WlgtStatus {
    let status = if e.is_resource_limit() { WlgtStatus::ResourceLimit } else { WlgtStatus::InvalidInput };
    fail(status, format!("{}: {e}", e.code()))
}

/// Runs `body`, turning panics into [`WlgtStatus::Panic`].
fn guard<F: FnOnce() -> WlgtStatus>(body: F) -> WlgtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(WlgtStatus::Panic, "internal panic".into()),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, WlgtStatus> {
    if s.is_null() {
        return Err(fail(WlgtStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(WlgtStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

unsafe fn graph_ref<'a>(g: *const WlgtGraph) -> Result<&'a Graph, WlgtStatus> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| fail(WlgtStatus::NullPointer, "null graph handle".into()))
}

fn into_handle(g: Graph) -> *mut WlgtGraph {
    Box::into_raw(Box::new(WlgtGraph { inner: g }))
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> WlgtStatus {
    *out = CString::new(text).expect("JSON has no nul bytes").into_raw();
    WlgtStatus::Ok
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! try_core {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return from_error(&err),
        }
    };
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wlgt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a graph JSON document into a new handle.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wlgt_graph_from_json(json: *const c_char, out: *mut *mut WlgtGraph) -> WlgtStatus {
    guard(|| {
        if out.is_null() {
            return fail(WlgtStatus::NullPointer, "null output pointer".into());
        }
        let text = try_status!(read_str(json));
        let g = try_core!(load_graph(text));
        *out = into_handle(g);
        WlgtStatus::Ok
    })
}

/// Creates handles for both graphs of a built-in pair.
///
/// # Safety
/// `name` must be a nul-terminated string; `g1` and `g2` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wlgt_builtin_pair(
    name: *const c_char,
    g1: *mut *mut WlgtGraph,
    g2: *mut *mut WlgtGraph,
) -> WlgtStatus {
    guard(|| {
        if g1.is_null() || g2.is_null() {
            return fail(WlgtStatus::NullPointer, "null output pointer".into());
        }
        let name = try_status!(read_str(name));
        let (a, b) = try_core!(builtin_pair(name));
        *g1 = into_handle(a);
        *g2 = into_handle(b);
        WlgtStatus::Ok
    })
}

/// Releases a graph handle. Null is ignored.
///
/// # Safety
/// `g` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wlgt_graph_free(g: *mut WlgtGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wlgt_graph_num_nodes(g: *const WlgtGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.num_nodes())
}

/// Refines both graphs side by side and reports whether they separate.
///
/// # Safety
/// `g` and `h` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wlgt_distinguish(
    g: *const WlgtGraph,
    h: *const WlgtGraph,
    variant: WlgtVariant,
    k: usize,
    s: usize,
    out: *mut WlgtVerdict,
) -> WlgtStatus {
    guard(|| {
        let (g, h) = (try_status!(graph_ref(g)), try_status!(graph_ref(h)));
        if out.is_null() {
            return fail(WlgtStatus::NullPointer, "null output pointer".into());
        }
        let v = try_core!(distinguish(g, h, variant.into(), k, s));
        *out = WlgtVerdict { distinguished: v.distinguished, at_iteration: v.at_iteration.map_or(-1, |t| t as i64) };
        WlgtStatus::Ok
    })
}

/// Refines to a stable coloring and writes the report as JSON.
///
/// # Safety
/// `g` must be a live handle and `out_json` a valid pointer; the string
/// must be released with [`wlgt_string_free`].
#[no_mangle]
pub unsafe extern "C" fn wlgt_refine_json(
    g: *const WlgtGraph,
    variant: WlgtVariant,
    k: usize,
    s: usize,
    out_json: *mut *mut c_char,
) -> WlgtStatus {
    guard(|| {
        let g = try_status!(graph_ref(g));
        if out_json.is_null() {
            return fail(WlgtStatus::NullPointer, "null output pointer".into());
        }
        let variant = variant.into();
        let history = try_core!(refine_to_stable(g, k, s, variant));
        write_string(out_json, ColoringReport::from_history(variant, &history).to_json())
    })
}

/// Runs the constructed transformer against WL refinement. `layers = 0`
/// runs until the coloring is stable. Writes the report either way and
/// returns [`WlgtStatus::Failed`] if some layer disagrees.
///
/// # Safety
/// `g` must be a live handle and `out_json` a valid pointer; the string
/// must be released with [`wlgt_string_free`].
#[no_mangle]
pub unsafe extern "C" fn wlgt_simulate_json(
    g: *const WlgtGraph,
    variant: WlgtVariant,
    k: usize,
    s: usize,
    layers: usize,
    temperature: f64,
    out_json: *mut *mut c_char,
) -> WlgtStatus {
    guard(|| {
        let g = try_status!(graph_ref(g));
        if out_json.is_null() {
            return fail(WlgtStatus::NullPointer, "null output pointer".into());
        }
        let mut cfg = SimConfig::new(k, s, variant.into()).with_temperature(temperature);
        if layers > 0 {
            cfg = cfg.with_layers(layers);
        }
        let report = try_core!(simulate_and_compare(g, &cfg));
        let pass = report.all_equal();
        write_string(out_json, report.to_json());
        if pass {
            WlgtStatus::Ok
        } else {
            fail(WlgtStatus::Failed, "transformer and WL partitions differ".into())
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wlgt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
