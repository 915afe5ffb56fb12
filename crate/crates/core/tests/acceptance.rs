//! Runs `nlw-lab all` twice with the default configuration and grades the
//! reports against the eleven acceptance criteria, one line each.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use serde_json::Value;

struct Run {
    reports: Vec<Value>,
    exit: Option<i32>,
}

fn run_all(dir: &Path) -> Run {
    let status = Command::new(env!("CARGO_BIN_EXE_nlw-lab"))
        .arg("all")
        .arg("--out")
        .arg(dir)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("nlw-lab runs");
    let reports = ["groundstate", "spectrum", "profiles", "fixedpoint", "dichotomy", "inequalities"]
        .iter()
        .filter_map(|c| fs::read_to_string(dir.join(c).join("report.json")).ok())
        .map(|text| serde_json::from_str(&text).expect("report is JSON"))
        .collect();
    Run {
        reports,
        exit: status.code(),
    }
}

/// Checks of `command` whose names start with any of `prefixes`.
fn checks<'a>(run: &'a Run, command: &str, prefixes: &[&str]) -> Vec<&'a Value> {
    run.reports
        .iter()
        .filter(|r| r["command"] == command)
        .flat_map(|r| r["checks"].as_array().into_iter().flatten())
        .filter(|c| {
            let name = c["name"].as_str().unwrap_or("");
            prefixes.iter().any(|p| name.starts_with(p))
        })
        .collect()
}

/// All named checks present (at least `expected`) and passing.
fn grade(run: &Run, command: &str, prefixes: &[&str], expected: usize) -> (bool, String) {
    let found = checks(run, command, prefixes);
    let failed: Vec<&str> = found
        .iter()
        .filter(|c| c["passed"] != true)
        .map(|c| c["name"].as_str().unwrap_or("?"))
        .collect();
    let ok = found.len() >= expected && failed.is_empty();
    let detail = if found.len() < expected {
        format!("{} of {expected} checks present", found.len())
    } else if failed.is_empty() {
        format!("{} checks pass", found.len())
    } else {
        format!("failing: {}", failed.join(", "))
    };
    (ok, detail)
}

fn both(a: (bool, String), b: (bool, String)) -> (bool, String) {
    (a.0 && b.0, format!("{}; {}", a.1, b.1))
}

/// Reference-grid `e0` per dimension against the shooting oracle.
fn shooting_agreement(run: &Run) -> (bool, String) {
    let Some(report) = run.reports.iter().find(|r| r["command"] == "spectrum") else {
        return (false, "no spectrum report".into());
    };
    let (radius, nodes) = (&report["config"]["radius"], &report["config"]["nodes"]);
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [6, 7, 8] {
        let row = report["data"]["refinement"]
            .as_array()
            .into_iter()
            .flatten()
            .find(|r| r["d"] == d && &r["radius"] == radius && &r["nodes"] == nodes);
        let Some(e0) = row.and_then(|r| r["e0"].as_f64()) else {
            ok = false;
            parts.push(format!("d={d} missing"));
            continue;
        };
        let oracle = common::shooting_e0(d);
        let rel = (e0 - oracle).abs() / oracle;
        ok &= rel < 0.01;
        parts.push(format!("d={d} {e0:.6} vs shooting {oracle:.6}"));
    }
    (ok, parts.join(", "))
}

fn identical(a: &Path, b: &Path) -> (bool, String) {
    let mut files = vec!["all.json".to_string()];
    for c in ["groundstate", "spectrum", "profiles", "fixedpoint", "dichotomy", "inequalities"] {
        for entry in fs::read_dir(a.join(c)).into_iter().flatten().flatten() {
            files.push(format!("{c}/{}", entry.file_name().to_string_lossy()));
        }
    }
    files.sort();
    let differing: Vec<&String> = files
        .iter()
        .filter(|f| match (fs::read(a.join(f)), fs::read(b.join(f))) {
            (Ok(x), Ok(y)) => x != y,
            _ => true,
        })
        .collect();
    if differing.is_empty() {
        (true, format!("{} files byte-identical", files.len()))
    } else {
        (false, format!("differ: {differing:?}"))
    }
}

fn main() -> ExitCode {
    let first_dir = tempfile::tempdir().expect("tempdir");
    let second_dir = tempfile::tempdir().expect("tempdir");
    let first = run_all(first_dir.path());
    let second = run_all(second_dir.path());
    let r = &first;

    let criteria: Vec<(bool, String)> = vec![
        grade(r, "groundstate", &["static residual"], 2),
        grade(r, "groundstate", &["pohozaev d=", "energy d="], 6),
        both(
            grade(r, "spectrum", &["negative count", "e0 stability", "eigen residual"], 12),
            shooting_agreement(r),
        ),
        grade(r, "profiles", &["residual rate a=1 ", "residual fit rms a=1 "], 6),
        grade(
            r,
            "fixedpoint",
            &["contraction ratio", "PDE residual over floor", "w^a rate", "w^a - v_k rate"],
            8,
        ),
        grade(r, "fixedpoint", &["threshold energy", "gradient side"], 12),
        grade(r, "dichotomy", &["classification a=1e-", "classification a=-1e-", "classification stable a=1e-", "classification stable a=-1e-"], 12),
        grade(r, "fixedpoint", &["shift law", "cross-sign residual"], 4),
        grade(r, "dichotomy", &["energy drift per unit time", "leapfrog time order"], 2),
        grade(r, "inequalities", &[""], 1),
        identical(first_dir.path(), second_dir.path()),
    ];

    let mut all = first.exit == Some(0) && second.exit == Some(0);
    if !all {
        println!("note: nlw-lab all exited with {:?} and {:?}", first.exit, second.exit);
    }
    for (n, (ok, detail)) in criteria.iter().enumerate() {
        println!("{} criterion {}: {detail}", if *ok { "PASS" } else { "FAIL" }, n + 1);
        all &= ok;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
