//! End-to-end tests against the compiled binary: exit codes, output
//! formats, and the integrate -> transform pipeline.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_painleve-xx"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn integrate_to_json(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut full = args.to_vec();
    let path_str = path.to_str().unwrap().to_owned();
    full.extend_from_slice(&["--format", "json", "--out"]);
    let out = bin().args(&full).arg(&path_str).output().expect("binary runs");
    assert_eq!(code(&out), 0, "integrate failed: {}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn integrate_csv_header_and_zero_solution() {
    let out = run(&[
        "integrate", "--model", "pii0", "--init", "0,0", "--t0", "0", "--t1", "1",
        "--samples", "5",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,s,s_dot"));
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 3);
        assert_eq!(fields[1], 0.0);
        assert_eq!(fields[2], 0.0);
    }
}

#[test]
fn integrate_xxprime_csv_header() {
    let out = run(&[
        "integrate", "--model", "xxprime", "--init", "1,0,4", "--t0", "0", "--t1", "0.5",
        "--samples", "3",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("t,S,S_dot,S_ddot"));
}

#[test]
fn bad_init_is_usage_error() {
    let out = run(&[
        "integrate", "--model", "pii0", "--init", "0,banana", "--t0", "0", "--t1", "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn wrong_init_dimension_is_usage_error() {
    let out = run(&[
        "integrate", "--model", "pii0", "--init", "0,0,0,0", "--t0", "0", "--t1", "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn xx_near_singular_start_is_domain_error() {
    let out = run(&[
        "integrate", "--model", "xx", "--init", "1e-15,1", "--t0", "0", "--t1", "1",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn xxprime_degenerate_zero_lift_is_rejected() {
    let out = run(&[
        "integrate", "--model", "xxprime", "--init", "0,0", "--t0", "0", "--t1", "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sddot_at_zero_conflicts_with_full_init() {
    let out = run(&[
        "integrate", "--model", "xxprime", "--init", "0,0,2", "--sddot-at-zero", "2",
        "--t0", "0", "--t1", "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn blow_up_reports_truncated_partial() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blow.json");
    // this solution has a pole before t = 2
    let out = bin()
        .args([
            "integrate", "--model", "pii0", "--init", "0,1", "--t0", "0", "--t1", "2",
            "--format", "json", "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["truncated"], serde_json::Value::Bool(true));
    assert!(doc["samples"].as_array().unwrap().len() > 1);
}

#[test]
fn unknown_suite_is_usage_error() {
    let out = run(&["verify", "--suite", "nonsense"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_all_passes_and_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bin()
        .args(["verify", "--suite", "all", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["overall"], serde_json::Value::Bool(true));
    assert!(report["cases"].as_array().unwrap().len() >= 20);
}

#[test]
fn sqrt_pos_on_zero_touching_path_is_branch_error() {
    let dir = tempfile::tempdir().unwrap();
    // third-order run started exactly at a zero of S: no positive root exists
    let traj = integrate_to_json(
        dir.path(),
        "touch.json",
        &[
            "integrate", "--model", "xxprime", "--init", "0,0", "--sddot-at-zero", "2",
            "--t0", "0", "--t1", "1",
        ],
    );
    let out = bin().args(["transform", "--op", "sqrt-pos", "--in"]).arg(&traj).output().unwrap();
    assert_eq!(code(&out), 5, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sqrt_neg_on_positive_path_is_branch_error() {
    let dir = tempfile::tempdir().unwrap();
    let traj = integrate_to_json(
        dir.path(),
        "pos.json",
        &["integrate", "--model", "xxprime", "--init", "1,0", "--t0", "0", "--t1", "1"],
    );
    let out = bin().args(["transform", "--op", "sqrt-neg", "--in"]).arg(&traj).output().unwrap();
    assert_eq!(code(&out), 5);
}

#[test]
fn signed_root_of_square_recovers_the_solution() {
    let dir = tempfile::tempdir().unwrap();
    // sqrt-signed of a pii0 trajectory squares it internally, then takes the
    // signed root across its single zero: the result must match the input
    let traj = integrate_to_json(
        dir.path(),
        "central.json",
        &[
            "integrate", "--model", "pii0", "--init=-1.016228606510028,1.169503299924042", "--t0=-1", "--t1", "1",
        ],
    );
    let out = bin()
        .args(["transform", "--op", "sqrt-signed", "--samples", "201", "--in"])
        .arg(&traj)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,s,s_dot"), "header was {header}");

    // values must agree with the original run: -s(-1) known from the header row
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((first[0] - (-1.0)).abs() < 1e-12);
    assert!(
        (first[1] - (-1.016228606510028)).abs() < 1e-7,
        "round-trip value {} drifted",
        first[1]
    );
}

#[test]
fn transform_rejects_missing_input() {
    let out = run(&["transform", "--op", "square", "--in", "/nonexistent/traj.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn event_detection_emits_event_block() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ev.json");
    let out = bin()
        .args([
            "integrate", "--model", "pii0", "--init=-1.016228606510028,1.169503299924042", "--t0=-1", "--t1", "1",
            "--events", "s-crosses-zero:rising", "--format", "json", "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let events = doc["events"].as_array().unwrap();
    assert_eq!(events.len(), 1);
    let t = events[0]["t"].as_f64().unwrap();
    assert!(t.abs() < 1e-9, "event at {t}");
}
