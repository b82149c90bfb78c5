use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_weylkit"));
    cmd.env_remove("WEYLKIT_WORKERS");
    cmd
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weylkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

fn scalar(m: &Value) -> (f64, f64) {
    let re = m["re"][0][0].as_f64().unwrap();
    let im = m["im"].get(0).map_or(0.0, |r| r[0].as_f64().unwrap());
    (re, im)
}

fn zero_potential() -> PathBuf {
    let path = scratch("zero.json");
    let n = 2001;
    write(
        &path,
        &json!({ "kind": "sa", "m1": 1, "m2": 1, "grid": { "x0": 0.0, "h": 0.01, "n": n }, "v": vec![json!({ "re": [[0.0]] }); n] }),
    );
    path
}

fn oracle_data() -> PathBuf {
    let path = scratch("oracle.json");
    write(&path, &json!({ "n": 1, "alpha": { "re": [[0.0]], "im": [[-0.5]] }, "theta1": [{ "re": 0.5 }], "theta2": [{ "re": 0.5 }] }));
    path
}

#[test]
fn weyl_of_zero_potential_vanishes() {
    let pot = zero_potential();
    let out = bin().args(["weyl", "--potential"]).arg(&pot).args(["--z", "0+1i", "--b", "5,10,20"]).output().unwrap();
    let v = stdout_json(&out);
    let s = &v["samples"][0];
    assert_eq!(scalar(&s["phi"]), (0.0, 0.0));
    assert_eq!(s["residual"], 0.0);
    assert_eq!(v["config"]["command"], "weyl");
    assert_eq!(v["config"]["args"]["b"], "5,10,20");
}

#[test]
fn negative_real_parts_parse() {
    let pot = zero_potential();
    let out = bin().args(["weyl", "--potential"]).arg(&pot).args(["--z", "-1+1i,2+0.5i"]).output().unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["samples"].as_array().unwrap().len(), 2);
    assert_eq!(v["samples"][0]["z"]["re"], -1.0);
}

#[test]
fn explicit_oracle_table() {
    let data = oracle_data();
    let out = bin().args(["dyn", "explicit", "--data"]).arg(&data).args(["--x-max", "1"]).output().unwrap();
    let v = stdout_json(&out);
    let h = v["x_grid"]["h"].as_f64().unwrap();
    let rows = v["v"].as_array().unwrap();
    assert_eq!(rows.len(), 101);
    for (k, z) in rows.iter().enumerate() {
        let x = k as f64 * h;
        let im = z["im"].as_f64().unwrap();
        assert!((im + 1.0 / (2.0 + x)).abs() < 1e-10, "x = {x}: {im}");
        assert!(z["re"].as_f64().unwrap().abs() < 1e-10);
    }
}

#[test]
fn explicit_oracle_csv() {
    let data = oracle_data();
    let out = bin().args(["dyn", "explicit", "--data"]).arg(&data).args(["--x-max", "1", "--format", "csv"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "x,re_v,im_v,p,q");
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 1.0).abs() < 1e-12);
    assert!((last[2] + 1.0 / 3.0).abs() < 1e-10);
    assert!((last[4] + 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn outputs_are_deterministic_and_written_to_out() {
    let pot = zero_potential();
    let run = |name: &str| {
        let path = scratch(name);
        let st = bin().args(["forward", "--potential"]).arg(&pot).args(["--z", "0.5+1i", "--out"]).arg(&path).status().unwrap();
        assert!(st.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("f1.json"), run("f2.json"));
}

#[test]
fn workers_env_is_recorded() {
    let pot = zero_potential();
    let out = bin().env("WEYLKIT_WORKERS", "3").args(["weyl", "--potential"]).arg(&pot).args(["--z", "1i"]).output().unwrap();
    assert_eq!(stdout_json(&out)["config"]["workers"], 3);
}

#[test]
fn missing_file_is_a_validation_error() {
    let out = bin().args(["weyl", "--potential", "/nonexistent/p.json", "--z", "1i"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "Invalid");
}

#[test]
fn bad_complex_is_a_validation_error() {
    let pot = zero_potential();
    let out = bin().args(["forward", "--potential"]).arg(&pot).args(["--z", "one"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("one"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "Usage");
}

#[test]
fn qa_check_factorial_powers() {
    let verdict = |s: &str| stdout_json(&bin().args(["qa-check", "--s", s]).output().unwrap())["report"]["verdict"].clone();
    assert_eq!(verdict("1"), "quasi_analytic");
    assert_eq!(verdict("1.5"), "not_quasi_analytic");
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("selftest"));
}

#[test]
fn growing_response_is_a_numerical_error() {
    let path = scratch("grow.json");
    let r: Vec<Value> = (0..801).map(|k| json!({ "re": (0.01 * k as f64).exp() })).collect();
    write(&path, &json!({ "t_grid": { "x0": 0.0, "h": 0.01, "n": 801 }, "r": r }));
    let out = bin().args(["dyn", "invert", "--response"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "TailTooLarge");
}
