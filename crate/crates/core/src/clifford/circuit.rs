use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tableau::CliffordOp;
use crate::error::{Error, Result};
use crate::qmat::{default_labels, sample, ComplexMatrix, DensityMatrix};

/// Chooses a layer's Clifford, optionally from the outcomes seen so far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Selector {
    Fixed(CliffordOp),
    /// Keyed by the full outcome string of all earlier layers, e.g. `"01"`.
    Adaptive(BTreeMap<String, CliffordOp>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmLayer {
    pub selector: Selector,
    /// Number of leading wires measured after the Clifford.
    pub measured: usize,
}

/// Wire counts `n_0, n_1, …, n_d` and per-layer measured counts `k_1, …, k_d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitShape {
    pub widths: Vec<usize>,
    pub measured: Vec<usize>,
}

impl CircuitShape {
    pub fn new(inputs: usize, measured: Vec<usize>) -> Result<Self> {
        let mut widths = vec![inputs];
        for (i, &k) in measured.iter().enumerate() {
            let prev = widths[i];
            if k > prev {
                return Err(Error::Shape(format!("layer {} measures {k} of {prev} wires", i + 1)));
            }
            widths.push(prev - k);
        }
        Ok(Self { widths, measured })
    }

    pub fn inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn outputs(&self) -> usize {
        *self.widths.last().expect("non-empty")
    }

    pub fn depth(&self) -> usize {
        self.measured.len()
    }

    pub fn total_measured(&self) -> usize {
        self.measured.iter().sum()
    }

    /// Outcome bits produced before layer `i` (0-based).
    pub fn measured_before(&self, i: usize) -> usize {
        self.measured[..i].iter().sum()
    }
}

pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn int_to_bits(v: usize, k: usize) -> Vec<bool> {
    (0..k).map(|j| (v >> (k - 1 - j)) & 1 == 1).collect()
}

pub fn bits_to_int(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// All bit strings of length `k` in lexicographic order.
pub fn all_strings(k: usize) -> Vec<String> {
    (0..1usize << k).map(|v| bit_string(&int_to_bits(v, k))).collect()
}

/// Layered Clifford + computational-measurement circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmCircuit {
    shape: CircuitShape,
    layers: Vec<CmLayer>,
}

impl CmCircuit {
    pub fn new(inputs: usize, layers: Vec<CmLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("a circuit needs at least one layer".into()));
        }
        let shape = CircuitShape::new(inputs, layers.iter().map(|l| l.measured).collect())?;
        for (i, layer) in layers.iter().enumerate() {
            let width = shape.widths[i];
            let check = |c: &CliffordOp| {
                if c.qubits() != width {
                    Err(Error::Shape(format!(
                        "layer {} Clifford acts on {} wires, expected {width}",
                        i + 1,
                        c.qubits()
                    )))
                } else {
                    Ok(())
                }
            };
            match &layer.selector {
                Selector::Fixed(c) => check(c)?,
                Selector::Adaptive(map) => {
                    for c in map.values() {
                        check(c)?;
                    }
                    for key in all_strings(shape.measured_before(i)) {
                        if !map.contains_key(&key) {
                            return Err(Error::MissingSelector(key));
                        }
                    }
                }
            }
        }
        Ok(Self { shape, layers })
    }

    pub fn single(c: CliffordOp, measured: usize) -> Result<Self> {
        let n = c.qubits();
        Self::new(
            n,
            vec![CmLayer {
                selector: Selector::Fixed(c),
                measured,
            }],
        )
    }

    pub fn identity(n: usize) -> Self {
        Self::single(CliffordOp::identity(n), 0).expect("identity circuit")
    }

    pub fn shape(&self) -> &CircuitShape {
        &self.shape
    }

    pub fn layers(&self) -> &[CmLayer] {
        &self.layers
    }

    pub fn inputs(&self) -> usize {
        self.shape.inputs()
    }

    pub fn outputs(&self) -> usize {
        self.shape.outputs()
    }

    pub fn is_adaptive(&self) -> bool {
        self.layers.iter().any(|l| matches!(l.selector, Selector::Adaptive(_)))
    }

    /// The Clifford of layer `i` given all earlier outcomes.
    pub fn select(&self, i: usize, outcomes: &[bool]) -> Result<&CliffordOp> {
        match &self.layers[i].selector {
            Selector::Fixed(c) => Ok(c),
            Selector::Adaptive(map) => {
                let key = bit_string(&outcomes[..self.shape.measured_before(i)]);
                map.get(&key).ok_or(Error::MissingSelector(key))
            }
        }
    }

    /// Maps every selectable Clifford of every layer through `f(layer, c)`.
    pub fn map_cliffords(
        &self,
        mut f: impl FnMut(usize, &CliffordOp) -> Result<CliffordOp>,
    ) -> Result<Vec<Selector>> {
        self.layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                Ok(match &l.selector {
                    Selector::Fixed(c) => Selector::Fixed(f(i, c)?),
                    Selector::Adaptive(m) => Selector::Adaptive(
                        m.iter()
                            .map(|(k, c)| Ok((k.clone(), f(i, c)?)))
                            .collect::<Result<_>>()?,
                    ),
                })
            })
            .collect()
    }

    /// Appends `extra` idle wires after the existing ones; they pass through untouched.
    pub fn with_idle_wires(&self, extra: usize) -> Result<Self> {
        let id = CliffordOp::identity(extra);
        let selectors = self.map_cliffords(|_, c| Ok(c.tensor(&id)))?;
        let layers = selectors
            .into_iter()
            .zip(&self.layers)
            .map(|(selector, l)| CmLayer {
                selector,
                measured: l.measured,
            })
            .collect();
        Self::new(self.inputs() + extra, layers)
    }
}

/// One sampled execution.
#[derive(Clone, Debug)]
pub struct CmRun {
    pub outcomes: Vec<bool>,
    pub output: DensityMatrix,
}

/// One measurement branch of an exact execution.
#[derive(Clone, Debug)]
pub struct CmBranch {
    pub outcomes: Vec<bool>,
    pub probability: f64,
    pub output: DensityMatrix,
}

fn check_input(q: &CmCircuit, x: &DensityMatrix) -> Result<()> {
    if x.qubits() != q.inputs() {
        return Err(Error::DimensionMismatch {
            expected: q.inputs(),
            got: x.qubits(),
        });
    }
    Ok(())
}

/// Reference evaluator: per layer apply the selected Clifford and sample the
/// leading `k_i` wires in the computational basis.
pub fn cm_eval<R: Rng + ?Sized>(q: &CmCircuit, x: &DensityMatrix, rng: &mut R) -> Result<CmRun> {
    check_input(q, x)?;
    let mut state = x.clone();
    let mut outcomes = Vec::new();
    for (i, layer) in q.layers.iter().enumerate() {
        state = q.select(i, &outcomes)?.apply(&state)?;
        let k = layer.measured;
        if k == 0 {
            continue;
        }
        let branches: Vec<(f64, Option<DensityMatrix>)> = (0..1usize << k)
            .map(|o| state.measure_prefix(k, o))
            .collect::<Result<_>>()?;
        let probs: Vec<f64> = branches.iter().map(|b| b.0).collect();
        let total: f64 = probs.iter().sum();
        let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let o = sample(&probs, rng)?;
        outcomes.extend(int_to_bits(o, k));
        state = branches[o].1.clone().expect("sampled outcome has support");
    }
    Ok(CmRun { outcomes, output: state })
}

/// Exhaustive branching over every measurement outcome with non-zero probability.
pub fn cm_eval_exact(q: &CmCircuit, x: &DensityMatrix) -> Result<Vec<CmBranch>> {
    check_input(q, x)?;
    let mut branches = vec![CmBranch {
        outcomes: Vec::new(),
        probability: 1.0,
        output: x.clone(),
    }];
    for (i, layer) in q.layers.iter().enumerate() {
        let mut next = Vec::new();
        for b in branches {
            let state = q.select(i, &b.outcomes)?.apply(&b.output)?;
            let k = layer.measured;
            for o in 0..1usize << k {
                let (p, post) = state.measure_prefix(k, o)?;
                if let Some(post) = post {
                    let mut outcomes = b.outcomes.clone();
                    outcomes.extend(int_to_bits(o, k));
                    next.push(CmBranch {
                        outcomes,
                        probability: b.probability * p,
                        output: post,
                    });
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// `Σ_o p_o |o⟩⟨o| ⊗ ρ_o` over `bits` outcome wires followed by the output wires.
pub fn branches_to_cq(branches: &[CmBranch], bits: usize, out_qubits: usize) -> Result<DensityMatrix> {
    let dout = 1usize << out_qubits;
    let d = (1usize << bits) * dout;
    let mut m = ComplexMatrix::zeros(d, d);
    for b in branches {
        if b.outcomes.len() != bits || b.output.qubits() != out_qubits {
            return Err(Error::Shape("branch does not match the classical-quantum layout".into()));
        }
        let base = bits_to_int(&b.outcomes) * dout;
        for r in 0..dout {
            for c in 0..dout {
                m[(base + r, base + c)] += b.output.matrix()[(r, c)] * b.probability;
            }
        }
    }
    let mut labels = default_labels("m", bits);
    labels.extend(default_labels("y", out_qubits));
    DensityMatrix::new_unchecked(m, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_passes_input() {
        let x = DensityMatrix::named("+i").unwrap();
        let run = cm_eval(&CmCircuit::identity(1), &x, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(run.outcomes.is_empty());
        assert!(run.output.matrix().approx_eq(x.matrix(), 1e-12));
    }

    #[test]
    fn hadamard_measure_is_uniform() {
        let q = CmCircuit::single(CliffordOp::h(1, 0), 1).unwrap();
        let branches = cm_eval_exact(&q, &DensityMatrix::zeros(1)).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!((b.probability - 0.5).abs() < 1e-12);
            assert_eq!(b.output.qubits(), 0);
        }
    }

    #[test]
    fn missing_selector_rejected() {
        let layers = vec![
            CmLayer {
                selector: Selector::Fixed(CliffordOp::h(2, 0)),
                measured: 1,
            },
            CmLayer {
                selector: Selector::Adaptive(BTreeMap::from([("0".to_string(), CliffordOp::identity(1))])),
                measured: 0,
            },
        ];
        assert_eq!(CmCircuit::new(2, layers), Err(Error::MissingSelector("1".into())));
    }

    #[test]
    fn shape_telescopes() {
        let s = CircuitShape::new(4, vec![1, 2, 0]).unwrap();
        assert_eq!(s.widths, vec![4, 3, 1, 1]);
        assert!(CircuitShape::new(1, vec![2]).is_err());
    }
}
