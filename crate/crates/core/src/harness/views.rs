use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{trace_distance, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViewMethod {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotValue {
    Quantum(DensityMatrix),
    /// Outcome label to probability.
    Classical(BTreeMap<String, f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    pub value: SlotValue,
}

/// Per-slot marginals of a view, averaged over the run's randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewDistribution {
    pub slots: Vec<Slot>,
    pub method: ViewMethod,
    pub samples: usize,
}

impl ViewDistribution {
    pub fn new(method: ViewMethod, samples: usize) -> Self {
        Self {
            slots: Vec::new(),
            method,
            samples,
        }
    }

    pub fn quantum(mut self, name: &str, rho: DensityMatrix) -> Self {
        self.slots.push(Slot {
            name: name.into(),
            value: SlotValue::Quantum(rho),
        });
        self
    }

    pub fn classical(mut self, name: &str, dist: BTreeMap<String, f64>) -> Self {
        self.slots.push(Slot {
            name: name.into(),
            value: SlotValue::Classical(dist),
        });
        self
    }

    pub fn slot(&self, name: &str) -> Option<&SlotValue> {
        self.slots.iter().find(|s| s.name == name).map(|s| &s.value)
    }

    /// Averages equally weighted views with identical schemas.
    pub fn average(views: &[ViewDistribution]) -> Result<Self> {
        let first = views.first().ok_or_else(|| Error::SchemaMismatch("no views to average".into()))?;
        let w = 1.0 / views.len() as f64;
        let mut slots = Vec::with_capacity(first.slots.len());
        for (i, s) in first.slots.iter().enumerate() {
            let column: Vec<&SlotValue> = views
                .iter()
                .map(|v| match v.slots.get(i) {
                    Some(t) if t.name == s.name => Ok(&t.value),
                    _ => Err(Error::SchemaMismatch(format!("slot {i} is not {}", s.name))),
                })
                .collect::<Result<_>>()?;
            let value = match &s.value {
                SlotValue::Quantum(_) => {
                    let parts = column
                        .iter()
                        .map(|v| match v {
                            SlotValue::Quantum(r) => Ok((w, r.clone())),
                            SlotValue::Classical(_) => Err(Error::SchemaMismatch(format!("{} changes kind", s.name))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    SlotValue::Quantum(DensityMatrix::mixture(&parts)?)
                }
                SlotValue::Classical(_) => {
                    let mut acc = BTreeMap::new();
                    for v in column {
                        let SlotValue::Classical(d) = v else {
                            return Err(Error::SchemaMismatch(format!("{} changes kind", s.name)));
                        };
                        for (k, p) in d {
                            *acc.entry(k.clone()).or_insert(0.0) += w * p;
                        }
                    }
                    SlotValue::Classical(acc)
                }
            };
            slots.push(Slot {
                name: s.name.clone(),
                value,
            });
        }
        Ok(Self {
            slots,
            method: first.method,
            samples: views.iter().map(|v| v.samples).sum(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityReport {
    pub pair: String,
    pub distances: BTreeMap<String, f64>,
    pub max: f64,
    pub samples: [usize; 2],
    pub method: ViewMethod,
}

/// Total-variation distance between two outcome distributions.
pub fn tv_distance(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let keys: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

pub fn compare_views(pair: &str, real: &ViewDistribution, ideal: &ViewDistribution) -> Result<DistinguishabilityReport> {
    if real.slots.len() != ideal.slots.len() {
        return Err(Error::SchemaMismatch(format!(
            "{} slots against {}",
            real.slots.len(),
            ideal.slots.len()
        )));
    }
    let mut distances = BTreeMap::new();
    for (r, i) in real.slots.iter().zip(&ideal.slots) {
        if r.name != i.name {
            return Err(Error::SchemaMismatch(format!("slot {} against {}", r.name, i.name)));
        }
        let d = match (&r.value, &i.value) {
            (SlotValue::Quantum(a), SlotValue::Quantum(b)) => {
                if a.qubits() != b.qubits() {
                    return Err(Error::SchemaMismatch(format!(
                        "{}: {} qubits against {}",
                        r.name,
                        a.qubits(),
                        b.qubits()
                    )));
                }
                trace_distance(a, b)?
            }
            (SlotValue::Classical(a), SlotValue::Classical(b)) => tv_distance(a, b),
            _ => return Err(Error::SchemaMismatch(format!("{} is quantum on one side only", r.name))),
        };
        distances.insert(r.name.clone(), d.clamp(0.0, 1.0));
    }
    let max = distances.values().copied().fold(0.0, f64::max);
    let method = if real.method == ViewMethod::Exact && ideal.method == ViewMethod::Exact {
        ViewMethod::Exact
    } else {
        ViewMethod::MonteCarlo
    };
    Ok(DistinguishabilityReport {
        pair: pair.into(),
        distances,
        max,
        samples: [real.samples, ideal.samples],
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin(p: f64) -> BTreeMap<String, f64> {
        BTreeMap::from([("0".to_string(), p), ("1".to_string(), 1.0 - p)])
    }

    #[test]
    fn identical_views_are_at_distance_zero() {
        let v = ViewDistribution::new(ViewMethod::Exact, 1)
            .quantum("q", DensityMatrix::named("+").unwrap())
            .classical("c", coin(0.3));
        let r = compare_views("same", &v, &v).unwrap();
        assert_eq!(r.max, 0.0);
        assert_eq!(r.method, ViewMethod::Exact);
    }

    #[test]
    fn pure_against_mixed_is_half() {
        let a = ViewDistribution::new(ViewMethod::Exact, 1).quantum("q", DensityMatrix::zeros(1));
        let b = ViewDistribution::new(ViewMethod::MonteCarlo, 10).quantum("q", DensityMatrix::maximally_mixed(1));
        let r = compare_views("p", &a, &b).unwrap();
        assert!((r.distances["q"] - 0.5).abs() < 1e-12);
        assert_eq!(r.method, ViewMethod::MonteCarlo);
        assert_eq!(compare_views("p", &b, &a).unwrap().max, r.max);
    }

    #[test]
    fn classical_tv_and_schema_checks() {
        let a = ViewDistribution::new(ViewMethod::Exact, 1).classical("c", coin(0.25));
        let b = ViewDistribution::new(ViewMethod::Exact, 1).classical("c", coin(0.75));
        assert!((compare_views("c", &a, &b).unwrap().max - 0.5).abs() < 1e-12);
        let q = ViewDistribution::new(ViewMethod::Exact, 1).quantum("c", DensityMatrix::zeros(1));
        assert!(matches!(compare_views("x", &a, &q), Err(Error::SchemaMismatch(_))));
        let other = ViewDistribution::new(ViewMethod::Exact, 1).classical("d", coin(0.25));
        assert!(matches!(compare_views("x", &a, &other), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn averaging_mixes_slots() {
        let a = ViewDistribution::new(ViewMethod::MonteCarlo, 1)
            .quantum("q", DensityMatrix::zeros(1))
            .classical("c", coin(1.0));
        let b = ViewDistribution::new(ViewMethod::MonteCarlo, 1)
            .quantum("q", DensityMatrix::named("1").unwrap())
            .classical("c", coin(0.0));
        let avg = ViewDistribution::average(&[a, b]).unwrap();
        let mixed = ViewDistribution::new(ViewMethod::Exact, 1)
            .quantum("q", DensityMatrix::maximally_mixed(1))
            .classical("c", coin(0.5));
        assert!(compare_views("avg", &avg, &mixed).unwrap().max < 1e-12);
        assert_eq!(avg.samples, 2);
    }
}
