use std::path::Path;
use std::process::{Command, Output};

fn madec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_madec")).args(args).output().expect("spawn madec")
}

fn layered(dir: &Path) -> String {
    let path = dir.join("layered.json").to_string_lossy().into_owned();
    let out = madec(&["construct", "layered", "--L", "3", "--cprob", "1", "--out", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn construct_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let path = layered(dir.path());
    let out = madec(&["inspect", &path]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "|Pi|=64 |M|=64 |O|=135");
}

#[test]
fn dec_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = layered(dir.path());
    let csv = dir.path().join("dec.csv");
    let out = madec(&[
        "dec", "--instance", &path, "--variant", "constrained", "--eps", "0.5", "--ref", "model:v(1,1,1)", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "variant,param,ref,value,gap,bound_direction");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "constrained");
    let value: f64 = row[3].parse().unwrap();
    assert!((0.0..=1.0).contains(&value));
}

#[test]
fn simulate_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = layered(dir.path());
    let out = madec(&["simulate", "--instance", &path, "--true-model", "v(1,1,1)", "--algo", "uniform", "--T", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = layered(dir.path());
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = madec(&[
            "simulate", "--instance", &path, "--true-model", "v(1,1,1)", "--algo", "first-hit", "--T", "20", "--reps",
            "5", "--seed", "9", "--out", csv.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        // drop the wallclock column
        std::fs::read_to_string(csv)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    let a = run("a.csv");
    assert_eq!(a[0], "rep,seed,algo,T,risk");
    assert_eq!(a.len(), 6);
    assert_eq!(a, run("b.csv"));
}

#[test]
fn verify_mwu_passes() {
    let out = madec(&["verify", "--suite", "mwu"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("PASS mwu"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(madec(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn malformed_instance_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = layered(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["obs"][0]["rewards"] = serde_json::json!(null);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let out = madec(&["inspect", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("obs[0].rewards"));
}
