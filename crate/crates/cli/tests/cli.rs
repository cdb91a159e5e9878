use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mermin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mermin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = mermin(&full);
    assert!(out.status.success(), "{args:?}: {}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_schema(&v);
    v
}

fn assert_schema(v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(v) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "report does not match schema: {msgs:#?}");
}

fn num(v: &Value, path: &str) -> f64 {
    v.pointer(path).and_then(Value::as_f64).unwrap_or_else(|| panic!("missing {path} in {v}"))
}

const PURE_000: &str = r#"{"dim": 8, "matrix": [
 [[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]],
 [[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]]}"#;

#[test]
fn bound_noisy_ghz() {
    let v = json(&["bound", "--state", "noisy-ghz", "--p", "0.6"]);
    assert!((num(&v, "/result/bound") - 2.4).abs() < 1e-12);
    assert!((num(&v, "/result/oracle") - 2.4).abs() < 1e-6);
    assert_eq!(v["result"]["tight"], true);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["restarts"], 32);
}

#[test]
fn bound_ghz_is_exactly_four() {
    let v = json(&["bound", "--state", "ghz"]);
    assert_eq!(num(&v, "/result/bound"), 4.0);
    assert_eq!(v["result"]["pair_is_max"], true);
}

#[test]
fn text_report_header() {
    let out = mermin(&["bound", "--state", "ad-ghz", "--gamma", "0.2", "--seed", "5", "--restarts", "7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let first = text.lines().next().unwrap();
    assert!(first.contains("seed=5") && first.contains("restarts=7"), "{first}");
    assert!(text.contains("tight"));
}

#[test]
fn csv_key_value_report() {
    let out = mermin(&["bound", "--state", "ghz", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    assert!(text.contains("seed,0\n"));
    assert!(text.contains("result.bound,4\n") || text.contains("result.bound,4.0\n"), "{text}");
}

#[test]
fn filtered_bound_diagonal_and_file() {
    let v = json(&["filtered-bound", "--state", "noisy-ghz", "--p", "0.5", "--filter", "2,1,1"]);
    assert!((num(&v, "/result/normalization") - 2.5).abs() < 1e-12);
    assert!(num(&v, "/result/oracle") <= num(&v, "/result/bound") + 1e-6);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("filters.json");
    let filters = r#"{"filters": [
        {"dim": 2, "matrix": [[[2,0],[0,0]],[[0,0],[1,0]]]},
        {"dim": 2, "matrix": [[[1,0],[0,0]],[[0,0],[1,0]]]},
        {"dim": 2, "matrix": [[[3,0],[0,0]],[[0,0],[3,0]]]}]}"#;
    std::fs::write(&path, filters).unwrap();
    let w = json(&[
        "filtered-bound",
        "--state",
        "noisy-ghz",
        "--p",
        "0.5",
        "--filter-file",
        path.to_str().unwrap(),
    ]);
    assert!((num(&w, "/result/bound") - num(&v, "/result/bound")).abs() < 1e-12);
}

#[test]
fn oracle_both_inequalities() {
    let m = json(&["oracle", "--state", "ghz"]);
    assert!((num(&m, "/result/value") - 4.0).abs() < 1e-6);
    assert_eq!(m["result"]["violation"], true);
    let s = json(&["oracle", "--state", "ghz", "--inequality", "svetlichny"]);
    assert!((num(&s, "/result/value") - 4.0 * 2f64.sqrt()).abs() < 1e-5);
    assert!(s["result"]["bound"].is_null());
}

#[test]
fn optimize_filter_saves_reusable_filters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("best.json");
    let v = json(&[
        "optimize-filter",
        "--state",
        "psi-pi8",
        "--p",
        "0.35",
        "--filter-restarts",
        "6",
        "--save-filters",
        path.to_str().unwrap(),
    ]);
    assert!(num(&v, "/result/value") > 2.0);
    assert_eq!(v["result"]["trace"].as_array().unwrap().len(), 6);
    let w = json(&["filtered-bound", "--state", "psi-pi8", "--p", "0.35", "--filter-file", path.to_str().unwrap()]);
    assert!((num(&w, "/result/pair_value") - num(&v, "/result/value")).abs() < 1e-9);
    assert!(num(&w, "/result/oracle") > 2.0);
}

#[test]
fn threshold_ad_ghz_unfiltered() {
    let v = json(&["threshold", "--state", "ad-ghz", "--mode", "unfiltered", "--tol", "1e-4"]);
    let exact = 1.0 - 2f64.powf(-2.0 / 3.0);
    assert!((num(&v, "/result/critical") - exact).abs() <= 1e-4);
    assert_eq!(v["result"]["violation_above"], false);
    assert_eq!(v["result"]["grid"].as_array().unwrap().len(), 21);
}

#[test]
fn sweep_csv_schema() {
    let out = mermin(&["sweep", "--state", "ad-ghz", "--range", "0:0.2:0.1", "--filter-restarts", "3", "--restarts", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("param,bound_unfiltered,bound_filtered,oracle_unfiltered,oracle_filtered,violation_unfiltered,violation_filtered,l,m,n")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.len(), 10);
        assert!(r[5] == "0" || r[5] == "1");
        assert!(r[6] == "0" || r[6] == "1");
    }
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][1], "4");

    let v = json(&["sweep", "--state", "ad-ghz", "--range", "0:0.2:0.1", "--filter-restarts", "3", "--restarts", "8"]);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    mermin_core::format::save_state(&good, &mermin_core::states::noisy_ghz(0.3).unwrap()).unwrap();
    let v = json(&["validate", "--state", "file", "--path", good.to_str().unwrap()]);
    assert_eq!(v["result"]["valid"], true);
    assert!((num(&v, "/result/trace") - 1.0).abs() < 1e-14);
    let b = json(&["bound", "--state", "file", "--path", good.to_str().unwrap()]);
    assert!((num(&b, "/result/bound") - 1.2).abs() < 1e-12);
}

#[test]
fn non_psd_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    // diag(1.5, -0.5, 0, ...) has unit trace but a negative eigenvalue
    let text = PURE_000
        .replacen("[[1,0],[0,0]", "[[1.5,0],[0,0]", 1)
        .replacen("[[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]", "[[0,0],[-0.5,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]", 1);
    std::fs::write(&bad, text).unwrap();
    for verb in ["bound", "validate"] {
        let out = mermin(&[verb, "--state", "file", "--path", bad.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1));
        assert!(stderr(&out).contains("NotPSD"), "{}", stderr(&out));
        assert!(stdout(&out).is_empty());
    }
}

#[test]
fn annihilating_filter_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    std::fs::write(&path, PURE_000).unwrap();
    let out = mermin(&["filtered-bound", "--state", "file", "--path", path.to_str().unwrap(), "--filter", "0,1,1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FilterAnnihilatesState"));
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["bound"],
        &["bound", "--state", "noisy-ghz"],
        &["bound", "--state", "file"],
        &["bound", "--state", "nope"],
        &["filtered-bound", "--state", "ghz"],
        &["threshold", "--state", "ghz"],
        &["sweep", "--state", "ad-ghz", "--range", "0:1"],
        &["bound", "--state", "ghz", "--jobs", "0"],
        &["bound", "--state", "ghz", "--filter", "1,2"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = mermin(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn out_of_range_parameter_exits_one() {
    let out = mermin(&["bound", "--state", "noisy-ghz", "--p", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_argv_gives_identical_bytes() {
    let args = ["optimize-filter", "--state", "ad-ghz", "--gamma", "0.4", "--filter-restarts", "4", "--format", "json"];
    let a = mermin(&args);
    let b = mermin(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let jobs: Vec<&str> = args.iter().copied().chain(["--jobs", "1"]).collect();
    assert_eq!(mermin(&jobs).stdout, a.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = mermin(&["bound", "--state", "ghz", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_schema(&v);
}
