use std::path::{Path, PathBuf};

use qpfe_core::scenario::{run_scenario, LoadedScenario, ScenarioConfig, ScenarioKind};
use qpfe_core::Error;

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(name: &str) -> qpfe_core::scenario::Report {
    let loaded = LoadedScenario::load(&scenario_dir().join(name)).unwrap();
    let out = run_scenario(&loaded).unwrap();
    for c in &out.report.criteria {
        assert!(c.passed, "{name}: {c:?}");
    }
    out.report
}

#[test]
fn bundled_scenarios_pass() {
    for name in [
        "choi-demo.json",
        "experiment.json",
        "scheme1.json",
        "scheme2.json",
        "scheme2-sampled.json",
        "scheme2-tamper.json",
        "reusable.json",
        "hybrids-alice.json",
        "hybrids-bob.json",
        "qcp.json",
    ] {
        let r = run(name);
        assert!(r.passed, "{name}");
        assert!(!r.criteria.is_empty(), "{name}");
    }
}

#[test]
fn every_kind_has_a_bundled_config() {
    let names: Vec<String> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .collect();
    for kind in ScenarioKind::ALL {
        assert!(names.iter().any(|n| n.starts_with(kind.name())), "{kind}");
    }
}

#[test]
fn same_seed_same_bytes() {
    for name in ["experiment.json", "scheme2.json", "qcp.json"] {
        let loaded = LoadedScenario::load(&scenario_dir().join(name)).unwrap();
        let a = run_scenario(&loaded).unwrap();
        let b = run_scenario(&loaded).unwrap();
        assert_eq!(a.report.to_json(), b.report.to_json(), "{name}");
        assert_eq!(a.transcript_log(), b.transcript_log(), "{name}");
    }
}

#[test]
fn seed_changes_samples() {
    let mut loaded = LoadedScenario::load(&scenario_dir().join("experiment.json")).unwrap();
    let a = run_scenario(&loaded).unwrap().report;
    loaded.config.seed += 1;
    let b = run_scenario(&loaded).unwrap().report;
    assert_ne!(a.histograms, b.histograms);
}

#[test]
fn tampering_shows_in_acceptance() {
    let r = run("scheme2-tamper.json");
    assert!(r.values["accept_probability"] < 1.0);
}

#[test]
fn malformed_circuit_is_a_parse_error() {
    let mut config = ScenarioConfig::new(ScenarioKind::Scheme2, 1);
    config.circuit = Some("circuits/malformed.qc".into());
    let err = LoadedScenario::from_config(config, &scenario_dir()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
}

#[test]
fn missing_circuit_file_is_a_config_error() {
    let mut config = ScenarioConfig::new(ScenarioKind::Qcp, 1);
    config.circuit = Some("circuits/nope.qc".into());
    assert!(matches!(LoadedScenario::from_config(config, &scenario_dir()), Err(Error::Config(_))));
}

#[test]
fn inline_circuit_with_wrong_k() {
    let mut config = ScenarioConfig::new(ScenarioKind::Scheme2, 1);
    config.k = Some(2);
    let loaded = LoadedScenario::with_circuit_text(config, "QUBITS 1\nT q0\n").unwrap();
    assert!(matches!(run_scenario(&loaded), Err(Error::Config(_))));
}
