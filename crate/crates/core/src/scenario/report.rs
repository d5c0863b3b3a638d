use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, ScenarioKind};
use crate::harness::Transcript;

/// One embedded pass/fail check: `value ≤ tolerance`, or a flag stored as 0/1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Criterion {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
        }
    }

    /// Passes when `ok`; value 0 means pass.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            passed: ok,
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: ScenarioKind,
    pub seed: u64,
    /// `exact`, `sampled` or `monte-carlo`.
    pub method: String,
    pub config: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit_text: Option<String>,
    pub histograms: BTreeMap<String, BTreeMap<String, u64>>,
    pub trace_distances: BTreeMap<String, f64>,
    /// Other reported numbers: probabilities, σ, sample counts.
    pub values: BTreeMap<String, f64>,
    pub criteria: Vec<Criterion>,
    pub passed: bool,
}

impl Report {
    pub fn new(config: &ScenarioConfig, method: &str, circuit_text: Option<String>) -> Self {
        Self {
            scenario: config.scenario,
            seed: config.seed,
            method: method.to_string(),
            config: config.clone(),
            circuit_text,
            histograms: BTreeMap::new(),
            trace_distances: BTreeMap::new(),
            values: BTreeMap::new(),
            criteria: Vec::new(),
            passed: true,
        }
    }

    pub fn check(&mut self, c: Criterion) {
        self.passed &= c.passed;
        self.criteria.push(c);
    }

    pub fn distance(&mut self, name: impl Into<String>, d: f64) {
        self.trace_distances.insert(name.into(), d);
    }

    pub fn value(&mut self, name: impl Into<String>, v: f64) {
        self.values.insert(name.into(), v);
    }

    pub fn histogram(&mut self, name: impl Into<String>, h: BTreeMap<String, u64>) {
        self.histograms.insert(name.into(), h);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Histogram over `"0"` and `"1"`.
pub fn bit_histogram(h: [u64; 2]) -> BTreeMap<String, u64> {
    BTreeMap::from([("0".to_string(), h[0]), ("1".to_string(), h[1])])
}

#[derive(Debug)]
pub struct ScenarioOutput {
    pub report: Report,
    pub transcripts: Vec<Transcript>,
}

impl ScenarioOutput {
    /// All transcripts as one line-delimited event log, each line tagged with its run.
    pub fn transcript_log(&self) -> String {
        let mut out = String::new();
        for (run, t) in self.transcripts.iter().enumerate() {
            for e in &t.events {
                let line = serde_json::json!({ "run": run, "event": e });
                out.push_str(&line.to_string());
                out.push('\n');
            }
            if let Some(a) = &t.abort {
                out.push_str(&serde_json::json!({ "run": run, "abort": a }).to_string());
                out.push('\n');
            }
        }
        out
    }
}
