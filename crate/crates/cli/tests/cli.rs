use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn tropzar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropzar")).args(args).env_remove("TROPZAR_JOBS").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn polytope_report() {
    let out = tropzar(&["polytope", "--file", path_str(&data("triangle.json")), "--report"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!((v["area2"].as_u64(), v["interior"].as_u64(), v["boundary"].as_u64()), (Some(3), Some(1), Some(3)));
}

#[test]
fn curve_subcommands() {
    let curve = data("marked_line_curve.json");
    let out = tropzar(&["curve", "validate", "--file", path_str(&curve)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["valid"], Value::Bool(true));
    let out = tropzar(&["curve", "degree", "--file", path_str(&curve)]);
    assert_eq!(json_of(&out)["degree"].as_array().unwrap().len(), 3);
}

#[test]
fn svg_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let curve = data("marked_line_curve.json");
    let out = tropzar(&["curve", "plot", "--file", path_str(&curve), "--bbox", "-3,-3,3,3", "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let again = tropzar(&["curve", "plot", "--file", path_str(&curve), "--bbox", "-3,-3,3,3"]);
    let written = std::fs::read(&a).unwrap();
    assert!(String::from_utf8_lossy(&written).contains("<svg"));
    assert_eq!(written, again.stdout);
}

#[test]
fn bad_bbox_is_input_error() {
    let out = tropzar(&["curve", "plot", "--file", path_str(&data("marked_line_curve.json")), "--bbox", "1,1,0,0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_curve_is_a_check_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // the single vertex has two unbalanced ends
    std::fs::write(&bad, r#"{"finite":["v"],"infinite":["a","b"],"edges":[["v","a","inf"],["v","b","inf"]],
        "h":{"v":[[0,1],[0,1]],"a":[[1,1],[0,1]],"b":[[0,1],[1,1]]}}"#)
        .unwrap();
    let out = tropzar(&["curve", "validate", "--file", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["valid"], Value::Bool(false));
}

#[test]
fn missing_file_is_input_error() {
    let out = tropzar(&["deform", "--file", "/nonexistent/curve.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/curve.json"));
}

#[test]
fn deform_and_certify() {
    let curve = data("marked_line_curve.json");
    let v = json_of(&tropzar(&["deform", "--file", path_str(&curve)]));
    assert_eq!(v["dim_E1"].as_u64(), Some(3));
    assert_eq!(v["c"].as_u64(), Some(0));
    let out = tropzar(&["certify", "--file", path_str(&curve), "--k", "1", "--alpha", path_str(&data("alpha_empty.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["verdict"], "CONSISTENT");
    assert_eq!(v["beta"].as_u64(), Some(3));
}

#[test]
fn enumerate_line() {
    let out = tropzar(&["--jobs", "2", "enumerate", "--degree", path_str(&data("line_degree.json")), "--genus", "0", "--ends", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["count"].as_u64(), Some(1));
}

#[test]
fn tropicalize_with_plot() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("t.svg");
    let out = tropzar(&["tropicalize", "--file", path_str(&data("marked_line_map.json")), "--plot", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["finite"].as_array().unwrap().len(), 2);
    assert!(svg.exists());
}

#[test]
fn charp_reports() {
    let v = json_of(&tropzar(&["charp", "thm41", "--p", "3", "--r", "1", "--chi2", "g,1"]));
    assert_eq!(v["singularities"]["points"][0]["local_orders"], serde_json::json!([3, 2]));
    assert_eq!(v["intersection"]["verified"], Value::Bool(true));
    assert_eq!(v["intersection_oracle"]["agrees"], Value::Bool(true));
    let v = json_of(&tropzar(&["charp", "thm42", "--p", "3", "--r", "1", "--xi", "2"]));
    assert_eq!(v["singular_count"].as_u64(), Some(2));
    let v = json_of(&tropzar(&["charp", "severi", "--d", "3", "--p", "3", "--r", "1", "--genus", "1", "--variant", "s"]));
    assert_eq!(v["expected_dim"].as_i64(), Some(9));
    assert_eq!(v["reducible"], Value::Bool(true));
}

#[test]
fn severi_out_of_range_names_the_bound() {
    let out = tropzar(&["charp", "severi", "--d", "2", "--p", "3", "--r", "1", "--genus", "1", "--variant", "s"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["failing_bounds"], serde_json::json!(["g <= (d-1)(d-2)/2"]));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tropzar(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tropzar(&["enumerate", "--genus", "0"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_tropzar"))
        .args(["polytope", "--file", "x.json"])
        .env("TROPZAR_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subset_run() {
    let out = tropzar(&["verify-paper", "--only", "thm41", "--p", "3", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["status"], "PASS");
    assert_eq!(checks[0]["computed"].as_object().unwrap().keys().collect::<Vec<_>>(), vec!["9"]);
    assert_eq!(v["header"]["seed"].as_u64(), Some(0));
}

#[test]
fn corrupted_golden_fails_with_diff() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden.json");
    let text = include_str!("../../core/golden/paper_golden.json").replace("\"dim_E1\": 3", "\"dim_E1\": 4");
    std::fs::write(&golden, text).unwrap();
    let out = tropzar(&["verify-paper", "--only", "deformation,tropicalize", "--golden", golden.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("FAIL deformation"), "{stderr}");
    assert!(stderr.contains("deformation.dim_E1: expected 4, computed 3"), "{stderr}");
    assert!(stderr.contains("PASS tropicalize"), "{stderr}");
}

#[test]
fn unparsable_golden_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let golden = dir.path().join("golden.json");
    std::fs::write(&golden, "{not json").unwrap();
    assert_eq!(tropzar(&["verify-paper", "--golden", golden.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn same_seed_same_report() {
    let args = ["verify-paper", "--only", "pick,thm41", "--seed", "7"];
    let a = tropzar(&args);
    let b = tropzar(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
