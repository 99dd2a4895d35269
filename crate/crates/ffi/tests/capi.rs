use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use serde_json::Value;
use srks_ffi::*;

const PAIR: &str = r#"{"m": 2, "support": [{"set": [0], "p": "1/2"}, {"set": [1], "p": "1/2"}]}"#;
const K4: &str = "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Option<String> {
    let p = srks_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

/// Takes ownership of a report and returns its JSON.
fn take(report: *mut SrksReport) -> Value {
    assert!(!report.is_null());
    let json = unsafe { CStr::from_ptr(srks_report_json(report)) }
        .to_str()
        .unwrap()
        .to_owned();
    unsafe { srks_report_free(report) };
    serde_json::from_str(&json).unwrap()
}

fn dist(json: &str) -> *mut SrksDistribution {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { srks_distribution_from_json(c(json).as_ptr(), &mut out) },
        SrksStatus::Ok
    );
    out
}

fn vectors(text: &str) -> *mut SrksVectors {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { srks_vectors_parse(c(text).as_ptr(), &mut out) },
        SrksStatus::Ok
    );
    out
}

fn graph(text: &str) -> *mut SrksGraph {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { srks_graph_parse(c(text).as_ptr(), &mut out) },
        SrksStatus::Ok
    );
    out
}

#[test]
fn pair_identity_and_descent() {
    let (d, v) = (dist(PAIR), vectors("1 2\n1\n1\n"));
    unsafe {
        assert_eq!(srks_distribution_ground_size(d), 2);
        assert_eq!((srks_vectors_len(v), srks_vectors_dim(v)), (2, 1));

        let mut out = ptr::null_mut();
        assert_eq!(srks_verify_identity(d, v, &mut out), SrksStatus::Ok);
        let r = take(out);
        assert_eq!(r["agree"], true);
        assert_eq!(r["enumeration"], r["closed_form"]);

        assert_eq!(srks_descend(d, v, 1e-9, &mut out), SrksStatus::Ok);
        let r = take(out);
        assert_eq!(r["certificate"]["set"], serde_json::json!([1]));
        assert_eq!(r["bound_met"], true);

        // the pair is not isotropic, so the main certificate refuses it
        assert_eq!(
            srks_main_certificate(d, v, 1e-9, &mut out),
            SrksStatus::InvalidInput
        );
        assert!(out.is_null());
        assert!(last_error().is_some());

        srks_distribution_free(d);
        srks_vectors_free(v);
    }
}

#[test]
fn graph_entry_points() {
    let g = graph(K4);
    unsafe {
        assert_eq!(srks_graph_edge_count(g), 6);
        let mut r = [0.0; 6];
        assert_eq!(
            srks_effective_resistances(g, r.as_mut_ptr(), 6),
            SrksStatus::Ok
        );
        assert!(r.iter().all(|x| (x - 0.5).abs() < 1e-12));
        assert_eq!(
            srks_effective_resistances(g, r.as_mut_ptr(), 5),
            SrksStatus::BufferSize
        );
        assert!(last_error().unwrap().contains("6 required"));

        let mut out = ptr::null_mut();
        assert_eq!(
            srks_thin_tree(g, 0.01, 5, 1_000_000, &mut out),
            SrksStatus::Ok
        );
        let cert = take(out);
        assert!(cert["alpha_spectral"].as_f64().unwrap() <= 1.0);
        srks_graph_free(g);
    }
}

#[test]
fn ksr_and_maxent() {
    let pairs = vectors("2 4\n1/2 1/2\n1/2 1/2\n1/2 -1/2\n1/2 -1/2\n");
    let tri = vectors("2 3\n-1 0\n0 -1\n1 -1\n");
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            srks_ksr_partition(pairs, 2, 1e-9, 1_000_000, &mut out),
            SrksStatus::Ok
        );
        let partition = take(out);
        for n in partition["norms"].as_array().unwrap() {
            assert!((n.as_f64().unwrap() - 0.5).abs() < 1e-9);
        }
        // the triangle's frame is the reduced Laplacian, not the identity
        assert_eq!(
            srks_ksr_partition(tri, 2, 1e-9, 1_000_000, &mut out),
            SrksStatus::InvalidInput
        );

        let target = [2.0 / 3.0; 3];
        assert_eq!(
            srks_fit_lambda(tri, target.as_ptr(), 3, 1e-10, 200, &mut out),
            SrksStatus::Ok
        );
        let model = take(out);
        let lambda: Vec<f64> = serde_json::from_value(model["lambda"].clone()).unwrap();
        assert!(lambda.iter().all(|l| (l - lambda[0]).abs() < 1e-6));

        let boundary = [1.0, 1.0, 0.0];
        assert_eq!(
            srks_fit_lambda(tri, boundary.as_ptr(), 3, 1e-10, 200, &mut out),
            SrksStatus::BoundaryOrInfeasible
        );
        assert!(out.is_null());
        assert_eq!(
            srks_fit_lambda(tri, ptr::null(), 3, 1e-10, 200, &mut out),
            SrksStatus::NullPointer
        );
        srks_vectors_free(pairs);
        srks_vectors_free(tri);
    }
}

#[test]
fn errors_are_reported_per_call() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            srks_vectors_parse(c("1 2\n1\n").as_ptr(), &mut out),
            SrksStatus::InvalidInput
        );
        assert!(out.is_null());
        assert!(last_error().is_some());

        let bad = [0xffu8, 0];
        assert_eq!(
            srks_graph_parse(bad.as_ptr().cast(), &mut ptr::null_mut()),
            SrksStatus::InvalidUtf8
        );
        assert_eq!(
            srks_graph_parse(ptr::null(), ptr::null_mut()),
            SrksStatus::NullPointer
        );

        // a successful call clears the message
        let g = graph(K4);
        assert!(last_error().is_none());
        srks_graph_free(g);

        let mut d = ptr::null_mut();
        let nonhomogeneous =
            r#"{"m": 2, "support": [{"set": [], "p": "1/2"}, {"set": [0], "p": "1/2"}]}"#;
        assert_eq!(
            srks_distribution_from_json(c(nonhomogeneous).as_ptr(), &mut d),
            SrksStatus::Ok
        );
        let v = vectors("1 2\n1\n1\n");
        let mut report = ptr::null_mut();
        assert_eq!(
            srks_verify_identity(d, v, &mut report),
            SrksStatus::InvalidInput
        );
        assert!(last_error().unwrap().contains("homogeneous"));
        srks_distribution_free(d);
        srks_vectors_free(v);

        // freeing NULL is a no-op
        srks_report_free(ptr::null_mut());
        srks_graph_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/srks.h"))
            .unwrap();
    let lib =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = lib
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from srks.h"
        );
    }
}

/// Compiles the C smoke test against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // integration tests run from target/<profile>/deps
    let profile_dir: PathBuf = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libsrks_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.1.0"));
}
