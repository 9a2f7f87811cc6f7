use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .env("LAB_WORKERS", "1")
        .output()
        .expect("lab binary runs")
}

fn write_config(dir: &Path, body: serde_json::Value) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn list_names_every_experiment() {
    let out = lab(&["list-experiments"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "rect-sweep",
        "ellipse-sweep",
        "heat-decay",
        "prop2-property",
        "lemma1-property",
        "thm2-ratio",
        "lemma5-property",
    ] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn run_then_verify_rect_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        serde_json::json!({ "experiment": "rect-sweep", "output_dir": run_dir, "a_over_b": [2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12] }),
    );
    let out = lab(&["run", &cfg]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("PASS C1 sandwich"));
    let csv = fs::read_to_string(run_dir.join("data/rect_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(lab(&["verify", run_dir.to_str().unwrap()]).status.success());
}

#[test]
fn tampered_data_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let cfg = write_config(
        dir.path(),
        serde_json::json!({ "experiment": "thm2-ratio", "output_dir": run_dir }),
    );
    assert!(lab(&["run", &cfg]).status.success());
    let path = run_dir.join("data/thm2_spot.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    lines[1] = "0,2,1,1".into();
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = lab(&["verify", run_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bad_configs_exit_with_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        serde_json::json!({ "experiment": "no-such-thing", "output_dir": dir.path().join("run") }),
    );
    let out = lab(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));

    let cfg = write_config(
        dir.path(),
        serde_json::json!({ "experiment": "heat-decay", "output_dir": dir.path().join("run"), "t": 0 }),
    );
    assert_eq!(lab(&["run", &cfg]).status.code(), Some(2));
    // validation happens before anything is written
    assert!(!dir.path().join("run").exists());
}

#[test]
fn invalid_worker_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .arg("list-experiments")
        .env("LAB_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
