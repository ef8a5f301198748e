mod common;

use common::{argwf, check_goldens, fixture};

#[test]
fn golden_corpus_is_byte_stable() {
    let bad = check_goldens();
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn runs_are_repeatable() {
    for args in [
        &["optimize", "-p", "example2.problem.json"][..],
        &["optimize", "-p", "instruments.problem.json", "--sequential"][..],
        &["validate", "-p", "instruments.problem.json", "-s", "instruments-si-prime.schedule.json"][..],
    ] {
        assert_eq!(argwf(args).stdout, argwf(args).stdout);
    }
}

#[test]
fn sequential_flag_gives_the_same_result() {
    let a = argwf(&["optimize", "-p", "instruments.problem.json", "--exact"]);
    let b = argwf(&["--sequential", "optimize", "-p", "instruments.problem.json", "--exact"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn clean_schedule_validates_with_exit_zero() {
    let opt = argwf(&["optimize", "-p", "example2.problem.json", "--exact"]);
    let dir = tempdir();
    let path = dir.join("opt.json");
    std::fs::write(&path, &opt.stdout).unwrap();
    let run = argwf(&["validate", "-p", "example2.problem.json", "-s", path.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stdout);
    assert!(run.stdout.is_empty());
}

#[test]
fn malformed_input_exits_2() {
    let run = argwf(&["cost", "-p", "bad-dimensions.problem.json", "-s", "example2.schedule.json"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("$.processing"), "{}", run.stderr);

    let run = argwf(&["validate", "-p", "example2.problem.json", "-s", "example5.schedule.json"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("$.routes.O3"), "{}", run.stderr);

    let run = argwf(&["validate", "-p", "missing.json", "-s", "example2.schedule.json"]);
    assert_eq!(run.code, 2);

    let run = argwf(&["af", "-p", "example2.problem.json", "--kind", "optimality"]);
    assert_eq!(run.code, 2);
}

#[test]
fn infeasible_instance_exits_3() {
    for extra in [&[][..], &["--exact"][..]] {
        let mut args = vec!["optimize", "-p", "infeasible.problem.json"];
        args.extend_from_slice(extra);
        let run = argwf(&args);
        assert_eq!(run.code, 3);
        assert!(run.stderr.contains(r#"{"job":"J1","skill":"welding"}"#), "{}", run.stderr);
    }
}

#[test]
fn oversized_exact_search_exits_4() {
    let run = argwf(&["optimize", "-p", "twelve-jobs.problem.json", "--exact"]);
    assert_eq!(run.code, 4);
    let run = argwf(&["optimize", "-p", "twelve-jobs.problem.json"]);
    assert_eq!(run.code, 0);
}

#[test]
fn trace_file_is_written() {
    let dir = tempdir();
    let path = dir.join("trace.json");
    let run = argwf(&[
        "optimize",
        "-p",
        "example2.problem.json",
        "--seed",
        "example2.schedule.json",
        "--trace",
        path.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0);
    let trace: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(trace.as_array().unwrap().len(), 1);
    assert_eq!(trace[0]["move"]["kind"], "swap-inter");
    assert_eq!(trace[0]["makespan"].as_f64(), Some(65.0));
}

#[test]
fn fixtures_round_trip_through_the_parser() {
    for name in ["example2.problem.json", "example5.problem.json", "instruments.problem.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let inst = argwf_core::format::parse_problem(&text).unwrap();
        let canonical = argwf_core::format::emit_problem(&inst);
        assert_eq!(argwf_core::format::parse_problem(&canonical).unwrap(), inst);
    }
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("argwf-cli-{}-{:?}", std::process::id(), std::thread::current().id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
