use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use wlgt_ffi::*;

fn graph(json: &str) -> *mut WlgtGraph {
    let text = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { wlgt_graph_from_json(text.as_ptr(), &mut out) }, WlgtStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = wlgt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { wlgt_string_free(p) };
    s
}

const P3: &str = r#"{"num_nodes": 3, "edges": [[0, 1], [1, 2]]}"#;

#[test]
fn refine_path_through_handle() {
    let g = graph(P3);
    assert_eq!(unsafe { wlgt_graph_num_nodes(g) }, 3);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { wlgt_refine_json(g, WlgtVariant::Kwl, 1, 1, &mut json) }, WlgtStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(report["histograms"].as_array().unwrap().last().unwrap(), &serde_json::json!([2, 1]));
    unsafe { wlgt_graph_free(g) };
}

#[test]
fn distinguish_builtin_pair() {
    let name = CString::new("c6_vs_2c3").unwrap();
    let (mut g, mut h) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { wlgt_builtin_pair(name.as_ptr(), &mut g, &mut h) }, WlgtStatus::Ok);
    let mut v = WlgtVerdict { distinguished: true, at_iteration: 0 };
    assert_eq!(unsafe { wlgt_distinguish(g, h, WlgtVariant::Kwl, 1, 1, &mut v) }, WlgtStatus::Ok);
    assert_eq!(v, WlgtVerdict { distinguished: false, at_iteration: -1 });
    assert_eq!(unsafe { wlgt_distinguish(g, h, WlgtVariant::KsLwl, 2, 1, &mut v) }, WlgtStatus::Ok);
    assert!(v.distinguished && v.at_iteration >= 0);
    unsafe {
        wlgt_graph_free(g);
        wlgt_graph_free(h);
    }
}

#[test]
fn simulate_reports_agreement() {
    let g = graph(P3);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { wlgt_simulate_json(g, WlgtVariant::Kwl, 1, 1, 3, 60.0, &mut json) }, WlgtStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
    assert_eq!(report["partition_equal_per_layer"], serde_json::json!([true, true, true, true]));
    unsafe { wlgt_graph_free(g) };
}

#[test]
fn errors_map_to_status_codes() {
    let bad = CString::new(r#"{"num_nodes": 2, "edges": [[0, 0]]}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { wlgt_graph_from_json(bad.as_ptr(), &mut out) }, WlgtStatus::InvalidInput);
    assert!(out.is_null());
    assert!(last_error().starts_with("SELF_LOOP"));

    assert_eq!(unsafe { wlgt_graph_from_json(ptr::null(), &mut out) }, WlgtStatus::NullPointer);

    let name = CString::new("unknown").unwrap();
    let (mut g, mut h) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { wlgt_builtin_pair(name.as_ptr(), &mut g, &mut h) }, WlgtStatus::InvalidInput);
    assert!(last_error().starts_with("UNKNOWN_PAIR"));

    let p3 = graph(P3);
    let mut v = WlgtVerdict { distinguished: false, at_iteration: -1 };
    let status = unsafe { wlgt_distinguish(p3, p3, WlgtVariant::Kwl, 2, 1, &mut v) };
    assert_eq!(status, WlgtStatus::InvalidInput);
    assert!(last_error().starts_with("VARIANT_SPACE_MISMATCH"));
    assert_eq!(unsafe { wlgt_distinguish(p3, ptr::null(), WlgtVariant::Kwl, 1, 1, &mut v) }, WlgtStatus::NullPointer);
    unsafe { wlgt_graph_free(p3) };

    assert_eq!(unsafe { wlgt_graph_num_nodes(ptr::null()) }, 0);
    unsafe {
        wlgt_graph_free(ptr::null_mut());
        wlgt_string_free(ptr::null_mut());
    }
}

#[test]
fn resource_limits_have_their_own_code() {
    let g = graph(P3);
    let mut json = ptr::null_mut();
    let status = unsafe { wlgt_refine_json(g, WlgtVariant::Kwl, 40, 40, &mut json) };
    assert_eq!(status, WlgtStatus::ResourceLimit);
    assert!(json.is_null());
    unsafe { wlgt_graph_free(g) };
}

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(header_dir().join("wlgt.h")).unwrap();
    for name in [
        "wlgt_graph_from_json",
        "wlgt_graph_free",
        "wlgt_builtin_pair",
        "wlgt_distinguish",
        "wlgt_refine_json",
        "wlgt_simulate_json",
        "wlgt_string_free",
        "wlgt_last_error_message",
        "typedef struct WlgtGraph WlgtGraph;",
        "WLGT_STATUS_RESOURCE_LIMIT = 4",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "wlgt.h"

int main(void) {
    WlgtGraph *g = NULL, *h = NULL;
    if (wlgt_builtin_pair("k33_vs_prism", &g, &h) != WLGT_STATUS_OK) return 10;
    if (wlgt_graph_num_nodes(g) != 6) return 11;
    WlgtVerdict v;
    if (wlgt_distinguish(g, h, WLGT_VARIANT_DELTA_KWL, 2, 2, &v) != WLGT_STATUS_OK) return 12;
    if (!v.distinguished) return 13;
    char *json = NULL;
    if (wlgt_refine_json(g, WLGT_VARIANT_KWL, 1, 1, &json) != WLGT_STATUS_OK) return 14;
    if (strstr(json, "\"histograms\"") == NULL) return 15;
    wlgt_string_free(json);
    WlgtGraph *bad = NULL;
    if (wlgt_graph_from_json("{\"num_nodes\": 0, \"edges\": []}", &bad) != WLGT_STATUS_INVALID_INPUT) return 16;
    if (wlgt_last_error_message() == NULL) return 17;
    wlgt_graph_free(g);
    wlgt_graph_free(h);
    printf("ok\n");
    return 0;
}
"#;

/// Compiles and runs a C client against the static library when a C
/// compiler and the archive are available.
#[test]
fn c_client_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler, skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let archive = profile_dir.join("libwlgt_ffi.a");
    if !archive.exists() {
        eprintln!("{} not built, skipping", archive.display());
        return;
    }
    let dir = std::env::temp_dir().join(format!("wlgt-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("client.c");
    let bin = dir.join("client");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_dir())
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C client failed to build");
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
    std::fs::remove_dir_all(&dir).ok();
}
