use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn opslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opslab")).args(args).output().expect("spawn opslab")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = opslab(&full);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    });
    (out.status.code().expect("exit code"), v)
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn write(p: &str, body: &str) {
    std::fs::write(Path::new(p), body).unwrap();
}

#[test]
fn jordan_block_is_three_isometry_but_not_two() {
    let dir = TempDir::new().unwrap();
    let j = path(&dir, "j.json");
    assert_eq!(opslab(&["generate", "jordan", "--k", "2", "--out", &j]).status.code(), Some(0));

    let (code, v) = json(&["check", "m-isometry", &j, "--m", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["verdicts"]["m-isometry"]["pass"], true);

    let (code, v) = json(&["check", "m-isometry", &j, "--m", "2"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdicts"]["m-isometry"]["pass"], false);

    let (code, _) = json(&["check", "power-bounded", &j]);
    assert_eq!(code, 1);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let j = path(&dir, "j.json");
    opslab(&["generate", "jordan", "--out", &j]);

    let (code, v) = json(&["check", "m-isometry", &j]);
    assert_eq!(code, 2);
    assert!(v["notes"][0].as_str().unwrap().contains("--m"));

    let bad = path(&dir, "bad.json");
    write(&bad, "{\"rows\": 2, \"cols\": 2, \"data\": [[1, 0]]}");
    assert_eq!(json(&["check", "power-bounded", &bad]).0, 2);

    let missing = path(&dir, "missing.json");
    assert_eq!(json(&["check", "power-bounded", &missing]).0, 2);

    assert_eq!(opslab(&["generate", "no-such-generator"]).status.code(), Some(2));
    assert_eq!(json(&["solve", "similarity", &j]).0, 2);
}

#[test]
fn manifest_members_are_selected_by_name() {
    let dir = TempDir::new().unwrap();
    let pair = path(&dir, "pair.json");
    let code = opslab(&["--seed", "5", "generate", "left-m-pair", "--n", "3", "--m", "2", "--out", &pair]).status.code();
    assert_eq!(code, Some(0));
    let s = format!("{pair}#S");
    let t = format!("{pair}#T");

    let (code, v) = json(&["check", "left-m-inverse", &s, &t, "--m", "2"]);
    assert_eq!(code, 0, "{v}");
    let (code, v) = json(&["solve", "similarity", &s, &t, "--m", "2"]);
    assert_eq!(code, 0, "{v}");

    let unknown = format!("{pair}#Q");
    assert_eq!(json(&["check", "power-bounded", &unknown]).0, 2);
}

#[test]
fn generation_is_deterministic_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.json");
    let b = path(&dir, "b.json");
    for p in [&a, &b] {
        let code = opslab(&["--seed", "11", "generate", "similar-isometry", "--n", "4", "--out", p]).status.code();
        assert_eq!(code, Some(0));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());

    let other = path(&dir, "c.json");
    opslab(&["--seed", "12", "generate", "similar-isometry", "--n", "4", "--out", &other]);
    assert_ne!(first, std::fs::read(&other).unwrap());

    let (_, inline) = json(&["--seed", "11", "generate", "similar-isometry", "--n", "4"]);
    let on_disk: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(inline["artifacts"]["output"], on_disk);

    let (code, v) = json(&["solve", "invariant-metric", &format!("{a}#S")]);
    assert_eq!(code, 0, "{v}");
    let (code, v) = json(&["check", "power-bounded", &format!("{a}#S")]);
    assert_eq!(code, 0, "{v}");
}

#[test]
fn identical_commands_give_identical_reports() {
    let args = ["suite", "pf-ascent", "--count", "3", "--dim-max", "3"];
    let first = opslab(&args);
    let second = opslab(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn small_suites_pass() {
    for suite in ["thm24", "prop26", "prop28", "douglas", "pf-ascent"] {
        let (code, v) = json(&["suite", suite, "--count", "2", "--dim-max", "3"]);
        assert_eq!(code, 0, "{suite}: {v}");
        assert_eq!(v["artifacts"]["violations"], 0, "{suite}");
    }
    let (code, _) = json(&["suite", "thm24", "--count", "1", "--dim-max", "1"]);
    assert_eq!(code, 0);
}

#[test]
fn conjugation_keyword_and_hyperbolic_family() {
    let dir = TempDir::new().unwrap();
    let h = path(&dir, "h.json");
    let code = opslab(&["generate", "one-c-isometry", "--n", "2", "--hyperbolic", "1.5", "--out", &h]).status.code();
    assert_eq!(code, Some(0));
    let s = format!("{h}#S");
    let (code, v) = json(&["check", "mc-isometry", &s, "entrywise", "--m", "1"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(json(&["check", "power-bounded", &s]).0, 1);
}

#[test]
fn douglas_factorizes_or_reports_range_failure() {
    let dir = TempDir::new().unwrap();
    let a = path(&dir, "a.json");
    let b = path(&dir, "b.json");
    let e22 = path(&dir, "e22.json");
    write(&a, "{\"rows\": 2, \"cols\": 2, \"data\": [[1, 0], [0, 0], [0, 0], [0, 0]]}");
    write(&b, "{\"rows\": 2, \"cols\": 2, \"data\": [[0, 0], [1, 0], [0, 0], [0, 0]]}");
    write(&e22, "{\"rows\": 2, \"cols\": 2, \"data\": [[0, 0], [0, 0], [0, 0], [1, 0]]}");

    let (code, v) = json(&["solve", "douglas", &a, &b]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["artifacts"]["mu2"], 1.0);
    let c: Vec<f64> = v["artifacts"]["C"]["data"].as_array().unwrap().iter().map(|z| z[0].as_f64().unwrap()).collect();
    assert_eq!(c, vec![0.0, 0.0, 1.0, 0.0]);

    let (code, v) = json(&["solve", "douglas", &a, &e22]);
    assert_eq!(code, 1, "{v}");
}
