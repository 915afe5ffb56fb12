use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nlw-lab"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

#[test]
fn small_spectrum_run_passes_and_records_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["spectrum", "--seed", "77", "--workers", "1"],
        Some(r#"{"dims": [6], "radius": 30.0, "nodes": 600}"#),
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS spectrum ")));
    assert!(stdout.contains("negative count d=6"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/spectrum/report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 77);
    assert_eq!(report["config"]["nodes"], 600);
    assert_eq!(report["format_version"], 1);
    assert!(dir.path().join("out/spectrum/eigenfunction_d6.field").exists());
}

#[test]
fn coarse_grid_fails_with_measured_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["groundstate"], Some(r#"{"dims": [6], "nodes": 100}"#), dir.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("FAIL groundstate static residual:")));
}

#[test]
fn bad_configs_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    for config in [r#"{"bogus": 1}"#, r#"{"d": 2}"#, r#"{"cfl": 3.0}"#, "not json"] {
        let out = run(&["spectrum"], Some(config), dir.path());
        assert_eq!(out.status.code(), Some(2), "{config}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_nlw-lab"))
        .args(["spectrum", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_nlw-lab")).arg("nonsense").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
