use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn qmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmlab"))
        .args(args)
        .output()
        .expect("qmlab runs")
}

fn run_ok(args: &[&str]) -> Value {
    let out = qmlab(args);
    assert!(
        out.status.success(),
        "qmlab {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn phi_of_the_full_turn_loop_is_two() {
    let spec = data("phi_t_loop.json");
    let v = run_ok(&["phi", "--spec", spec.to_str().unwrap()]);
    let value = v["result"]["value"].as_f64().unwrap();
    let bound = v["result"]["error_bound"].as_f64().unwrap();
    assert_eq!(bound, 2.0 / 512.0);
    assert!((value - 2.0).abs() <= bound);
}

#[test]
fn out_dir_gets_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = data("phi_t_loop.json");
    let out = qmlab(&["phi", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let json: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("phi.json")).unwrap()).unwrap();
    assert_eq!(json["kind"], "phi");
    let csv = std::fs::read_to_string(dir.path().join("phi.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("p,value,error_bound"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn reeb_constant_hamiltonian_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "reeb.json",
        r#"{"kind": "reeb", "mesh": "builtin:genus2_plate", "field": "builtin:tilted_height", "hamiltonian": {"constant": 3.0}}"#,
    );
    let v = run_ok(&["reeb", "--spec", &spec]);
    assert_eq!(v["result"]["genus"], 2);
    assert!(v["result"]["trivalent_formula"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["result"]["euler_sums"].as_array().unwrap().iter().all(|s| s == -2));
}

#[test]
fn cal_s_rejects_genus_one() {
    let dir = tempfile::tempdir().unwrap();
    let iso = std::fs::read_to_string(data("disk_bump_genus2.json")).unwrap();
    write(dir.path(), "iso.json", &iso.replace("\"genus\": 2", "\"genus\": 1"));
    let spec = write(
        dir.path(),
        "cal_s.json",
        r#"{"kind": "cal_s", "isotopy": "iso.json", "p": 4, "n_points": 10, "seed": 1}"#,
    );
    assert_eq!(qmlab(&["cal_s", "--spec", &spec]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bump.json", &std::fs::read_to_string(data("bump.json")).unwrap());
    let spec = write(
        dir.path(),
        "tau.json",
        r#"{"kind": "tau", "scenario": "bump.json", "p": 8, "n_samples": 200}"#,
    );
    let a = qmlab(&["tau", "--spec", &spec, "--seed", "5"]);
    let b = qmlab(&["tau", "--spec", &spec, "--seed", "5", "--jobs", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["spec"]["seed"], 5);
    let c = qmlab(&["tau", "--spec", &spec, "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("tau", write(d, "bad.json", "{\"kind\": \"tau\", ")),
        ("tau", write(d, "unknown.json", r#"{"kind": "tau", "scenario": "x.json", "p": 2, "n_samples": 4, "seed": 1, "extra": 0}"#)),
        ("phi", write(d, "kind.json", r#"{"kind": "calabi", "scenario": "x.json"}"#)),
        ("defect", write(d, "noseed.json", r#"{"kind": "defect", "evaluator": "phi", "n_pairs": 4}"#)),
        ("phi", write(d, "missing.json", r#"{"kind": "phi", "path": "nowhere.json"}"#)),
        ("phi", d.join("absent.json").to_str().unwrap().to_string()),
    ];
    for (kind, spec) in &cases {
        let out = qmlab(&[kind, "--spec", spec]);
        assert_eq!(out.status.code(), Some(2), "{spec}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // a large phase jump onto a matrix without a principal square root
    // cannot be refined
    write(
        dir.path(),
        "coarse.json",
        r#"{"n": 1, "times": [0.0, 1.0], "matrices": [[1, 0, 0, 1],
            [-0.3985215271097537, -1.6929997094620608, -1.6929997094620608, -9.701478472890246]]}"#,
    );
    let spec = write(dir.path(), "phi.json", r#"{"kind": "phi", "path": "coarse.json", "p": [4]}"#);
    let out = qmlab(&["phi", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
