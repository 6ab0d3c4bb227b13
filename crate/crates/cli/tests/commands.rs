use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn orbitcut(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_orbitcut")).args(args).output().unwrap();
    let code = out.status.code().unwrap();
    let value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, value)
}

fn c5_instance(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["gen", "-g", "(1,2,3,4,5)", "--point", "2,2,2,2,1", "-o", &path];
    args.extend_from_slice(extra);
    let (code, v) = orbitcut(&args);
    assert_eq!(code, 0);
    assert_eq!(v["written"], path.as_str());
    path
}

#[test]
fn generated_instance_has_cut_rows_and_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let path = c5_instance(dir.path(), "c5.json", &[]);
    let text = std::fs::read_to_string(&path).unwrap();
    let file = orbitcut_cli::file::parse(&text).unwrap();
    assert_eq!(file.instance.rows.len(), 11);
    assert!(file.warnings.is_empty());

    let (code, v) = orbitcut(&["analyze", &path]);
    assert_eq!(code, 0);
    assert_eq!(v["class"], "DisjointCycles");
    assert_eq!(v["selected_cycles"], serde_json::json!(["(1,2,3,4,5)"]));
    assert_eq!(v["lp_layer"], "9");

    let (code, v) = orbitcut(&["solve", "--no-timing", &path]);
    assert_eq!(code, 2);
    assert_eq!(v["verdict"], "Infeasible");
    assert_eq!(v["algorithm"], "Layers");
    assert!(v.get("timing").is_none_or(Value::is_null));
}

#[test]
fn dropping_the_cuts_makes_the_vertex_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let path = c5_instance(dir.path(), "open.json", &["--no-cuts"]);
    let export = dir.path().join("export");
    let (code, v) = orbitcut(&["solve", &path, "--export-dir", export.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "Feasible");
    let point: Vec<i64> = v["point"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().parse().unwrap()).collect();
    let mut sorted = point.clone();
    sorted.sort();
    assert_eq!(sorted, vec![1, 2, 2, 2, 2]);
    let written = std::fs::read_dir(&export).unwrap().count();
    assert_eq!(written, v["subproblems"].as_array().unwrap().len());
    assert!(std::fs::read_dir(&export)
        .unwrap()
        .any(|e| e.unwrap().file_name().to_string_lossy().ends_with("_S2.json")));
}

#[test]
fn reports_without_timing_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = c5_instance(dir.path(), "c5.json", &[]);
    let (_, a) = orbitcut(&["solve", "--no-timing", "--jobs", "1", &path]);
    let (_, b) = orbitcut(&["solve", "--no-timing", "--jobs", "3", &path]);
    assert_eq!(a, b);
}

#[test]
fn non_core_point_is_rejected() {
    let (code, v) = orbitcut(&["gen", "-g", "(1,2,3,4,5)", "--point", "2,1,1,1,0"]);
    assert_eq!(code, 64);
    assert!(v.is_null());
}

#[test]
fn check_core_reports_core() {
    let (code, v) = orbitcut(&["check-core", "-g", "(1,2,3,4,5)", "2,2,2,2,1"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "Core");
    assert_eq!(v["membership_verdict"], "Core");
    let (_, v) = orbitcut(&["check-core", "-g", "(1,2,3)", "2,1,0"]);
    assert_eq!(v["verdict"], "NotCore");
    assert_eq!(v["witness"], serde_json::json!([1, 1, 1]));
}

#[test]
fn essential_set_for_six_and_three() {
    let (code, v) = orbitcut(&["essential", "6", "3", "4"]);
    assert_eq!(code, 0);
    assert_eq!(
        v["points"],
        serde_json::json!([[1, 1, 1, 0, 0, 0], [1, 1, 0, 0, 1, 0], [1, 0, 1, 0, 1, 0], [2, 0, 1, 0, 0, 0]])
    );
    assert_eq!(v["kinds"], serde_json::json!(["Universal", "Universal", "Universal", "Atom"]));
}

#[test]
fn tvalues_of_a_small_vector() {
    let (code, v) = orbitcut(&["tvalues", "2,1,0"]);
    assert_eq!(code, 0);
    assert_eq!(v["t"], serde_json::json!(["1", "-1", "0"]));
    assert_eq!(v["layer_sum"], 3);
}

#[test]
fn trivial_group_gets_a_note() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plain.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "objective": {"sense": "max", "coeffs": [1, 1]},
            "rows": [{"coeffs": [1, 2], "sense": "<=", "rhs": "7/2"}],
            "bounds": [{"lo": 0, "hi": 3}, {"lo": 0, "hi": 3}]}"#,
    )
    .unwrap();
    let (code, v) = orbitcut(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert!(v["notes"][0].as_str().unwrap().starts_with("NoSymmetry"));
    let (code, v) = orbitcut(&["solve", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["algorithm"], "NoSymmetry");
    assert_eq!(v["objective"], "3");
}

#[test]
fn bad_input_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{}").unwrap();
    assert_eq!(orbitcut(&["analyze", bad.to_str().unwrap()]).0, 64);
    std::fs::write(&bad, r#"{"n": 1, "objective": {"sense": "max", "coeffs": [1]}, "bounds": [[0, 1]]}"#).unwrap();
    assert_eq!(orbitcut(&["analyze", bad.to_str().unwrap()]).0, 64);
    assert_eq!(orbitcut(&["analyze", dir.path().join("missing.json").to_str().unwrap()]).0, 64);
    assert_eq!(orbitcut(&["tvalues", "1,x"]).0, 64);
    assert_eq!(orbitcut(&["tvalues", "1,1,1"]).0, 64);
    assert_eq!(orbitcut(&["essential", "4", "0", "2"]).0, 64);
    assert_eq!(orbitcut(&["frobnicate"]).0, 64);
    assert_eq!(orbitcut(&["--help"]).0, 0);
}
