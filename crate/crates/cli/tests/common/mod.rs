#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Runs the binary with fixture names expanded to paths.
pub fn argwf(args: &[&str]) -> Run {
    let args: Vec<String> = args
        .iter()
        .map(|a| if a.ends_with(".json") { fixture(a).display().to_string() } else { a.to_string() })
        .collect();
    let out = Command::new(env!("CARGO_BIN_EXE_argwf"))
        .args(&args)
        .env_remove("ARGWF_EPS")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
        stderr: String::from_utf8(out.stderr).expect("utf-8"),
    }
}

/// Golden name, arguments, expected exit code.
pub const CASES: &[(&str, &[&str], i32)] = &[
    ("example2-validate.jsonl", &["validate", "-p", "example2.problem.json", "-s", "example2.schedule.json"], 1),
    ("example2-explain.jsonl", &["explain", "-p", "example2.problem.json", "-s", "example2.schedule.json"], 0),
    ("example2-cost.json", &["cost", "-p", "example2.problem.json", "-s", "example2.schedule.json"], 0),
    ("example2-optimize-exact.json", &["optimize", "-p", "example2.problem.json", "--exact"], 0),
    (
        "example2-optimize-seeded.json",
        &["optimize", "-p", "example2.problem.json", "--seed", "example2.schedule.json"],
        0,
    ),
    (
        "example2-af-efficiency.dot",
        &["af", "-p", "example2.problem.json", "-s", "example2.schedule.json", "--kind", "efficiency", "--format", "dot"],
        0,
    ),
    (
        "example2-af-feasibility.json",
        &["af", "-p", "example2.problem.json", "-s", "example2.schedule.json", "--kind", "feasibility", "--format", "json"],
        0,
    ),
    ("example5-af-skills.dot", &["af", "-p", "example5.problem.json", "--kind", "skills", "--format", "dot"], 0),
    ("example5-validate.jsonl", &["validate", "-p", "example5.problem.json", "-s", "example5.schedule.json"], 1),
    (
        "example6-af-instrument-si.dot",
        &["af", "-p", "instruments.problem.json", "-s", "instruments-si.schedule.json", "--kind", "instrument"],
        0,
    ),
    (
        "example6-validate-si-prime.jsonl",
        &["validate", "-p", "instruments.problem.json", "-s", "instruments-si-prime.schedule.json"],
        1,
    ),
    (
        "example7-af-job-instrument.dot",
        &["af", "-p", "instruments.problem.json", "-s", "instruments-si.schedule.json", "--kind", "job-instrument"],
        0,
    ),
    ("example7-validate.jsonl", &["validate", "-p", "instruments.problem.json", "-s", "instruments-si.schedule.json"], 1),
    ("example7-optimize-exact.json", &["optimize", "-p", "instruments.problem.json", "--exact"], 0),
];

/// Compares every case against its golden file; with `UPDATE_GOLDEN` set
/// the files are rewritten instead. Returns the mismatches.
pub fn check_goldens() -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut bad = Vec::new();
    for (name, args, code) in CASES {
        let run = argwf(args);
        if run.code != *code {
            bad.push(format!("{name}: exit {} (expected {code}); stderr: {}", run.code, run.stderr));
            continue;
        }
        let path = golden_path(name);
        if update {
            std::fs::write(&path, &run.stdout).expect("golden written");
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(expected) if expected == run.stdout => {}
            Ok(_) => bad.push(format!("{name}: output differs from golden")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
    }
    bad
}
