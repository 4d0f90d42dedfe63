use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chainlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainlab"))
        .args(args)
        .env_remove("CHAINLAB_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn heisenberg_case_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let run = chainlab(&[
        "paper", "heisenberg", "--p", "2", "--q", "3", "--depth", "6", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = read_json(&out);
    assert_eq!(report["pass"], true);
    assert!(!report["subresults"].as_array().unwrap().is_empty());
    assert!(String::from_utf8_lossy(&run.stdout).contains("PASS"));
}

#[test]
fn bass_degree_of_heisenberg() {
    let run = chainlab(&["growth", "bass", "--model", "heisenberg"]);
    assert_eq!(run.status.code(), Some(0));
    let v = stdout_json(&run);
    assert_eq!(v["lcs"]["bass_degree"], 4);
    assert_eq!(v["lcs"]["ranks"], serde_json::json!([2, 1]));
}

#[test]
fn degree_of_z3_is_three() {
    let run = chainlab(&["growth", "degree", "--model", "free-abelian", "--rank", "3", "--rmax", "40"]);
    assert_eq!(run.status.code(), Some(0));
    let slope = stdout_json(&run)["estimate"]["slope"].as_f64().unwrap();
    assert!((slope - 3.0).abs() < 0.3, "{slope}");
}

#[test]
fn ball_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ball.csv");
    let run = chainlab(&[
        "growth", "ball", "--model", "heisenberg", "--rmax", "3", "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text, "radius,count\n0,1\n1,7\n2,29\n3,83\n");
}

#[test]
fn rt_case_reports_failed_check() {
    let run = chainlab(&["paper", "rt"]);
    assert_eq!(run.status.code(), Some(1));
    let v = stdout_json(&run);
    assert_eq!(v["pass"], false);
    assert!(String::from_utf8_lossy(&run.stderr).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(chainlab(&["growth", "degree"]).status.code(), Some(2));
    assert_eq!(chainlab(&["frobnicate"]).status.code(), Some(2));
    let bad = chainlab(&["chain", "classify", "--family", "heis-diag", "--p", "2", "--q", "2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("distinct primes"));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"chain":{"family":"heis-diag","p":2,"q":3,"r":1}}"#).unwrap();
    let run = chainlab(&["--config", cfg.to_str().unwrap(), "chain", "classify"]);
    assert_eq!(run.status.code(), Some(2));
    let err = String::from_utf8_lossy(&run.stderr);
    assert!(err.contains("chain") && err.contains("unknown field"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"chain":{"family":"heis-diag","p":2,"q":3},"depth":2}"#).unwrap();
    let run = chainlab(&["--config", cfg.to_str().unwrap(), "action", "levels", "--depth", "1"]);
    assert_eq!(run.status.code(), Some(0));
    let v = stdout_json(&run);
    let sizes: Vec<&Value> = v["levels"].as_array().unwrap().iter().map(|l| &l["size"]).collect();
    assert_eq!(sizes, [1, 12]);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        vec!["paper", "notvh"],
        vec!["chain", "classify", "--family", "heis-diag", "--p", "2", "--q", "3", "--depth", "4"],
        vec!["growth", "ball", "--model", "split-ext", "--rmax", "6"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut bytes = vec![];
        for k in 0..2 {
            let path = dir.path().join(format!("{i}-{k}.json"));
            let mut full = args.clone();
            full.extend(["--out", path.to_str().unwrap()]);
            assert_eq!(chainlab(&full).status.code(), Some(0), "{args:?}");
            bytes.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{args:?}");
    }
}

#[test]
fn cache_dir_is_populated_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["action", "levels", "--family", "rt-diag", "--p", "5", "--q", "7", "--depth", "2"];
    let run = |cache: &Path| {
        Command::new(env!("CARGO_BIN_EXE_chainlab"))
            .args(args)
            .env("CHAINLAB_CACHE_DIR", cache)
            .output()
            .unwrap()
    };
    let first = run(dir.path());
    assert_eq!(first.status.code(), Some(0));
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert!(entries >= 2, "{entries}");
    let second = run(dir.path());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), entries);
}

#[test]
fn out_directory_holds_only_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bass.json");
    let run = chainlab(&["--out", out.to_str().unwrap(), "growth", "bass", "--model", "heisenberg"]);
    assert_eq!(run.status.code(), Some(0));
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, vec![std::ffi::OsString::from("bass.json")]);
}
