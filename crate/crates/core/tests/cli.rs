use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn srks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srks"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn verify_identity_on_pair() {
    let out = srks(&[
        "verify-identity",
        "--dist",
        &fixture("pair.json"),
        "--vectors",
        &fixture("pair.vec"),
    ]);
    assert_eq!(code(&out), 0);
    let rec = &json(&out)["instances"][0];
    for key in ["enumeration", "operator", "closed_form"] {
        assert_eq!(rec[key], "x^2 - 2");
    }
}

#[test]
fn verify_identity_random() {
    let out = srks(&[
        "verify-identity",
        "--random",
        "--m",
        "4",
        "--d",
        "2",
        "--trials",
        "20",
        "--seed",
        "7",
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["instances"].as_array().unwrap().len(), 20);
    assert_eq!(report["all_agree"], true);
}

#[test]
fn non_homogeneous_input_exits_2() {
    let out = srks(&[
        "verify-identity",
        "--dist",
        &fixture("nonhomogeneous.json"),
        "--vectors",
        &fixture("pair.vec"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("homogeneous"));
}

#[test]
fn descend_on_pair_and_triangle() {
    let out = srks(&[
        "descend",
        "--dist",
        &fixture("pair.json"),
        "--vectors",
        &fixture("pair.vec"),
    ]);
    assert_eq!(code(&out), 0);
    let cert = &json(&out)["certificate"];
    assert_eq!(cert["set"], serde_json::json!([1]));
    assert_eq!(cert["spectral_norm"].as_f64().unwrap(), 1.0);

    let out = srks(&[
        "descend",
        "--dist",
        &fixture("triangle_ust.json"),
        "--vectors",
        &fixture("triangle.vec"),
    ]);
    assert_eq!(code(&out), 0);
    let cert = &json(&out)["certificate"];
    assert_eq!(cert["set"].as_array().unwrap().len(), 2);
    let root = cert["mixed_root"].as_f64().unwrap();
    assert!(cert["spectral_norm"].as_f64().unwrap() <= root * root / 2.0 + 1e-9);
}

#[test]
fn certificate_rejects_non_isotropic_vectors() {
    let out = srks(&[
        "certificate",
        "--dist",
        &fixture("pair.json"),
        "--vectors",
        &fixture("pair.vec"),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn resistance_text_report() {
    let out = srks(&["resistance", &fixture("triangle.el"), "--format", "text"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.matches("resistance: 0.666667").count(), 3, "{text}");
}

#[test]
fn thintree_on_k4() {
    let out = srks(&["thintree", &fixture("k4.el")]);
    assert_eq!(code(&out), 0);
    let cert = json(&out);
    assert!(cert["alpha_spectral"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert_eq!(cert["tree"].as_array().unwrap().len(), 3);
}

#[test]
fn ksr_on_pairs() {
    let out = srks(&["ksr", "--r", "2", &fixture("pairs.vec")]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    for n in report["norms"].as_array().unwrap() {
        assert!((n.as_f64().unwrap() - 0.5).abs() < 1e-9);
    }
}

#[test]
fn maxent_exit_codes() {
    let out = srks(&[
        "maxent",
        &fixture("triangle.vec"),
        "--target",
        "0.8,0.6,0.6",
    ]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["residual"].as_f64().unwrap() < 1e-8);
    let out = srks(&[
        "maxent",
        &fixture("triangle.vec"),
        "--target",
        "1.0,0.5,0.5",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.vec");
    std::fs::write(&bad, "2 2\n1 0\n0\n").unwrap();
    let out = srks(&["ksr", "--r", "2", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let out = srks(&[
        "resistance",
        &dir.path().join("missing.el").to_string_lossy(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = srks(&[
        "certificate",
        "--dist",
        &fixture("pair.json"),
        "--vectors",
        &fixture("pair.vec"),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!target.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);

    let out = srks(&[
        "resistance",
        &fixture("triangle.el"),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(written["n"], 3);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = [
        "sample",
        "--dist",
        &fixture("triangle_ust.json"),
        "--count",
        "30",
        "--seed",
        "11",
    ];
    let (a, b) = (srks(&args), srks(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let other = srks(&[
        "sample",
        "--dist",
        &fixture("triangle_ust.json"),
        "--count",
        "30",
        "--seed",
        "12",
    ]);
    assert_ne!(a.stdout, other.stdout);
}
