use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qpfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpfe")).args(args).output().unwrap()
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run_to(name: &str, out: &Path, extra: &[&str]) -> Output {
    let config = scenario(name);
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    qpfe(&args)
}

#[test]
fn choi_demo_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run_to("choi-demo.json", &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["scenario"], "choi-demo");
    assert_eq!(report["passed"], true);
    let identity = report["criteria"].as_array().unwrap().iter().find(|c| c["name"] == "choi_identity").unwrap();
    assert!(identity["value"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn experiment_seed_7_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(run_to("experiment.json", &a, &["--seed", "7"]).status.code(), Some(0));
    assert_eq!(run_to("experiment.json", &b, &["--seed", "7"]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn flags_land_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let log = dir.path().join("t.jsonl");
    let o = run_to("scheme2.json", &out, &["--seed", "99", "--sampled", "--transcripts", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["seed"], 99);
    assert_eq!(report["method"], "sampled");
    assert_eq!(report["config"]["method"], "sampled");
    let first = std::fs::read_to_string(&log).unwrap();
    let line: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(line["run"], 0);
    assert!(line["event"]["label"].is_string());
}

#[test]
fn malformed_circuit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.qc"), "QUBITS 2\nH q0\nFOO q1\n").unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, r#"{"scenario": "scheme2", "seed": 1, "circuit": "bad.qc"}"#).unwrap();
    let o = qpfe(&["run", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn config_without_seed_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, r#"{"scenario": "experiment"}"#).unwrap();
    assert_eq!(qpfe(&["run", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn list_is_stable_and_names_experiment() {
    let a = qpfe(&["list"]);
    let b = qpfe(&["list"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("experiment")));
    assert_eq!(text.lines().count(), 7);
}
