use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn forge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coreset-forge"))
        .args(args)
        .env_remove("CORESET_FORGE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mixture(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("points.csv");
    let out = forge(&["lb-gen", "mixture n=600 d=2 k=3 seed=2", "--out", s(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

const SUITES: &str = "random_box=20,dz_seeded=10,coreset_adversarial=5";

#[test]
fn build_then_eval_passes() {
    let dir = tempfile::tempdir().unwrap();
    let points = mixture(dir.path());
    let run = dir.path().join("run");
    let report = dir.path().join("bundle.json");
    let out = forge(&[
        "build", "--input", s(&points), "-k", "3", "--eps", "0.2", "--suites", SUITES, "--out-dir", s(&run),
        "--json-out", s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let bundle: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(bundle["passed"], Value::Bool(true));
    assert_eq!(bundle["config"]["k"], 3);
    assert!(run.join("coreset.json").exists());

    let coreset = run.join("coreset.csv");
    let out = forge(&["eval", "--points", s(&points), "--coreset", s(&coreset), "--suites", "subset_of_p=10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = forge(&["eval", "--points", s(&points), "--coreset", s(&coreset), "--max-distortion", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn builds_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let points = mixture(dir.path());
    let mut files = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "4")] {
        let run = dir.path().join(name);
        let out = forge(&[
            "build", "--input", s(&points), "-k", "3", "--eps", "0.2", "--delta", "40", "--suites", "random_box=5",
            "--seed", "11", "--threads", threads, "--out-dir", s(&run),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        files.push((fs::read(run.join("coreset.csv")).unwrap(), fs::read(run.join("report.json")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn config_file_supplies_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = dir.path().join("run.json");
    let text = format!(
        r#"{{"source":{{"generator":"basis k=2 eps=1/12"}},"k":2,"z":2,"epsilon":0.3,"seed":4,
            "suites":[{{"kind":"hadamard_family","count":0,"seed":1}}],"output_dir":{:?}}}"#,
        s(&run)
    );
    fs::write(&cfg, text).unwrap();
    let out = forge(&["--config", s(&cfg), "build", "--no-weight-check"]);
    assert!(matches!(code(&out), 0 | 2), "{}", String::from_utf8_lossy(&out.stderr));
    let bundle: Value = serde_json::from_str(&fs::read_to_string(run.join("bundle.json")).unwrap()).unwrap();
    assert_eq!(bundle["config"]["seed"], 4);
    assert_eq!(bundle["report"]["solutions"], 4);
}

#[test]
fn operational_errors_exit_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let missing = dir.path().join("missing.csv");
    let out = forge(&["build", "--input", s(&missing), "-k", "2", "--eps", "0.1", "--out-dir", s(&run)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
    assert!(!run.exists());
    assert_eq!(code(&forge(&["build", "--bogus"])), 1);
    assert_eq!(code(&forge(&["lb-gen", "basis k=3 eps=1/12", "--out", s(&dir.path().join("b.csv"))])), 1);
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_coreset-forge"))
        .args(["approx", "--generate", "mixture n=200 d=2 k=2", "-k", "2", "--out"])
        .arg(dir.path().join("s.csv"))
        .env("CORESET_FORGE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let bad = Command::new(env!("CARGO_BIN_EXE_coreset-forge"))
        .args(["approx", "--generate", "mixture n=200 d=2 k=2", "-k", "2"])
        .env("CORESET_FORGE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 1);
}

#[test]
fn lower_bound_generators() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("basis.json");
    let out = forge(&[
        "lb-gen", "basis k=2 eps=1/12", "--out", s(&dir.path().join("basis.csv")), "--solutions",
        s(&dir.path().join("h.csv")), "--json-out", s(&json),
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!((v["d"].as_u64(), v["ambient_dim"].as_u64()), (Some(8), Some(16)));
    let out = forge(&["lb-gen", "star k=4 eps=1/4 centers=6 nu=16", "--out", s(&dir.path().join("star.bin"))]);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("star.json").exists());
}

#[test]
fn monte_carlo_and_inspect() {
    let out = forge(&["mc", "tail", "--m", "50", "--eps", "0.2", "--trials", "20000", "--max-rate", "10"]);
    assert_eq!(code(&out), 0);
    let out = forge(&["mc", "tail", "--m", "50", "--eps", "0.2", "--trials", "20000", "--max-rate", "0.01"]);
    assert_eq!(code(&out), 2);
    let out = forge(&[
        "mc", "unbiased", "--generate", "mixture n=300 d=2 k=3 seed=1", "-k", "3", "--eps", "0.3", "--reps", "500",
        "--solutions", "1", "--tolerance", "0.2",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = forge(&["inspect", "--generate", "mixture n=300 d=2 k=3", "-k", "3", "--eps", "0.2"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("groups"));
}
