//! Clifford-sandwich garbling of C+M circuits: `qgarble`, `qgeval`, `qgsim`.
//!
//! Each layer descriptor is `F_i = (X^{r_i} ⊗ D_i)(C_i ⊗ I_λ)D_{i−1}†` with
//! fresh uniform Cliffords `D_i` and `D_d = I`. The measurement pads `r_i`
//! are stored in the clear, so the construction hides the circuit only from
//! an evaluator that follows the descriptors honestly.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    bit_string, cm_eval, cm_eval_exact, random_clifford, CircuitShape, CliffordOp, CmBranch, CmCircuit, CmLayer,
    PauliOp, Selector,
};
use crate::error::{Error, Result};
use crate::qmat::DensityMatrix;

/// `E_0`, acting on `n_0 + λ` wires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarbledInputKey {
    pub e0: CliffordOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarbledLayer {
    /// Keyed by the decrypted outcome string of earlier layers when adaptive.
    pub descriptor: Selector,
    pub measured: usize,
    /// X pads on the measured wires, one bit per wire.
    pub pads: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarbledCircuit {
    pub shape: CircuitShape,
    pub lambda: usize,
    pub layers: Vec<GarbledLayer>,
}

/// Result of a sampled garbled evaluation.
#[derive(Clone, Debug)]
pub struct GarbledRun {
    pub raw_outcomes: Vec<bool>,
    pub outcomes: Vec<bool>,
    /// The `n_d` output wires with the traps traced out.
    pub output: DensityMatrix,
    /// Probability that every trap ends in `|0⟩`.
    pub trap_probability: f64,
}

fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn pad_clifford(pads: &[bool], rest: &CliffordOp) -> CliffordOp {
    let k = pads.len();
    if k == 0 {
        return rest.clone();
    }
    let x = PauliOp::from_bits(pads, &vec![false; k]).expect("equal lengths");
    CliffordOp::from_pauli(&x).tensor(rest)
}

/// Garbles `q`: returns the input key and the layer descriptors.
pub fn qgarble<R: Rng + ?Sized>(
    q: &CmCircuit,
    shape: &CircuitShape,
    lambda: usize,
    rng: &mut R,
) -> Result<(GarbledInputKey, GarbledCircuit)> {
    if q.shape() != shape {
        return Err(Error::Shape(format!("circuit shape {:?} differs from {:?}", q.shape(), shape)));
    }
    let d = shape.depth();
    let mut keys = vec![random_clifford(shape.widths[0] + lambda, rng)];
    for i in 1..=d {
        let w = shape.widths[i] + lambda;
        keys.push(if i == d || w == 0 {
            CliffordOp::identity(w)
        } else {
            random_clifford(w, rng)
        });
    }
    let traps = CliffordOp::identity(lambda);
    let mut layers = Vec::with_capacity(d);
    for (i, layer) in q.layers().iter().enumerate() {
        let k = layer.measured;
        let pads: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
        let outer = pad_clifford(&pads, &keys[i + 1]);
        let inner = keys[i].inverse();
        let f = |c: &CliffordOp| -> Result<CliffordOp> { outer.compose(&c.tensor(&traps).compose(&inner)?) };
        let descriptor = match &layer.selector {
            Selector::Fixed(c) => Selector::Fixed(f(c)?),
            Selector::Adaptive(m) => Selector::Adaptive(
                m.iter().map(|(key, c)| Ok((key.clone(), f(c)?))).collect::<Result<_>>()?,
            ),
        };
        layers.push(GarbledLayer {
            descriptor,
            measured: k,
            pads,
        });
    }
    let e0 = keys.swap_remove(0);
    Ok((
        GarbledInputKey { e0 },
        GarbledCircuit {
            shape: shape.clone(),
            lambda,
            layers,
        },
    ))
}

impl GarbledInputKey {
    /// `E_0(x ⊗ 0^λ)`.
    pub fn encode(&self, x: &DensityMatrix, lambda: usize) -> Result<DensityMatrix> {
        self.e0.apply(&x.tensor(&DensityMatrix::zeros(lambda)))
    }
}

impl GarbledCircuit {
    pub fn validate(&self) -> Result<()> {
        if self.layers.len() != self.shape.depth() {
            return Err(Error::MalformedGarbling(format!(
                "{} layers for depth {}",
                self.layers.len(),
                self.shape.depth()
            )));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.pads.len() != l.measured || l.measured != self.shape.measured[i] {
                return Err(Error::MalformedGarbling(format!("layer {} pad/measure mismatch", i + 1)));
            }
        }
        Ok(())
    }

    /// The descriptors as a C+M circuit keyed by raw (padded) outcomes.
    pub fn as_raw_circuit(&self) -> Result<CmCircuit> {
        self.validate()?;
        let mut all_pads = Vec::new();
        let mut layers = Vec::new();
        for l in &self.layers {
            let selector = match &l.descriptor {
                Selector::Fixed(c) => Selector::Fixed(c.clone()),
                Selector::Adaptive(m) => {
                    let mut raw = BTreeMap::new();
                    for (key, c) in m {
                        let bits: Vec<bool> = key.chars().map(|ch| ch == '1').collect();
                        if bits.len() != all_pads.len() {
                            return Err(Error::MalformedGarbling(format!("descriptor key {key:?} has wrong length")));
                        }
                        raw.insert(bit_string(&xor(&bits, &all_pads)), c.clone());
                    }
                    Selector::Adaptive(raw)
                }
            };
            layers.push(CmLayer {
                selector,
                measured: l.measured,
            });
            all_pads.extend(&l.pads);
        }
        CmCircuit::new(self.shape.inputs() + self.lambda, layers)
            .map_err(|e| Error::MalformedGarbling(e.to_string()))
    }

    pub fn pads(&self) -> Vec<bool> {
        self.layers.iter().flat_map(|l| l.pads.iter().copied()).collect()
    }

    fn finish(&self, raw: Vec<bool>, out: &DensityMatrix) -> Result<(Vec<bool>, DensityMatrix, f64)> {
        let outcomes = xor(&raw, &self.pads());
        let n = self.shape.outputs();
        let (p, _, _) = crate::clifford::split_traps(out, self.lambda)?;
        Ok((outcomes, out.keep_range(0, n)?, p))
    }
}

/// Applies each descriptor, measures, strips pads, and follows the outcome.
pub fn qgeval<R: Rng + ?Sized>(x_tilde: &DensityMatrix, q: &GarbledCircuit, rng: &mut R) -> Result<GarbledRun> {
    let raw = q.as_raw_circuit()?;
    let run = cm_eval(&raw, x_tilde, rng)?;
    let (outcomes, output, trap_probability) = q.finish(run.outcomes.clone(), &run.output)?;
    Ok(GarbledRun {
        raw_outcomes: run.outcomes,
        outcomes,
        output,
        trap_probability,
    })
}

/// Exhaustive branching version of [`qgeval`]; outcomes are decrypted and
/// outputs have the traps traced out.
pub fn qgeval_exact(x_tilde: &DensityMatrix, q: &GarbledCircuit) -> Result<Vec<CmBranch>> {
    let raw = q.as_raw_circuit()?;
    cm_eval_exact(&raw, x_tilde)?
        .into_iter()
        .map(|b| {
            let (outcomes, output, _) = q.finish(b.outcomes, &b.output)?;
            Ok(CmBranch {
                outcomes,
                probability: b.probability,
                output,
            })
        })
        .collect()
}

/// Fake garbled input and circuit that evaluate to `x_out` using only the shape.
pub fn qgsim<R: Rng + ?Sized>(
    x_out: &DensityMatrix,
    shape: &CircuitShape,
    lambda: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, GarbledCircuit)> {
    if x_out.qubits() != shape.outputs() {
        return Err(Error::Shape(format!(
            "output has {} qubits, shape ends with {}",
            x_out.qubits(),
            shape.outputs()
        )));
    }
    let (key, gc) = qgsim_keyed(shape, lambda, rng);
    let start = DensityMatrix::zeros(shape.total_measured())
        .tensor(x_out)
        .tensor(&DensityMatrix::zeros(lambda));
    Ok((key.e0.apply(&start)?, gc))
}

/// The circuit half of [`qgsim`]; the fake input is `E_0(0^K ⊗ x_out ⊗ 0^λ)`
/// with `K` the total number of measured wires.
pub fn qgsim_keyed<R: Rng + ?Sized>(shape: &CircuitShape, lambda: usize, rng: &mut R) -> (GarbledInputKey, GarbledCircuit) {
    let d = shape.depth();
    let mut keys = vec![random_clifford(shape.widths[0] + lambda, rng)];
    for i in 1..=d {
        let w = shape.widths[i] + lambda;
        keys.push(if i == d || w == 0 {
            CliffordOp::identity(w)
        } else {
            random_clifford(w, rng)
        });
    }
    let mut layers = Vec::with_capacity(d);
    for i in 0..d {
        let k = shape.measured[i];
        let pads: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
        let f = pad_clifford(&pads, &keys[i + 1])
            .compose(&keys[i].inverse())
            .expect("matching widths");
        layers.push(GarbledLayer {
            descriptor: Selector::Fixed(f),
            measured: k,
            pads,
        });
    }
    let e0 = keys.swap_remove(0);
    (
        GarbledInputKey { e0 },
        GarbledCircuit {
            shape: shape.clone(),
            lambda,
            layers,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::trace_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_clifford_telescopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_clifford(2, &mut rng);
        let q = CmCircuit::single(c.clone(), 0).unwrap();
        let (key, gc) = qgarble(&q, q.shape(), 0, &mut rng).unwrap();
        let x = DensityMatrix::named("+").unwrap().tensor(&DensityMatrix::named("1").unwrap());
        let run = qgeval(&key.encode(&x, 0).unwrap(), &gc, &mut rng).unwrap();
        let direct = c.apply(&x).unwrap();
        assert!(trace_distance(&run.output, &direct).unwrap() < 1e-10);
    }

    #[test]
    fn measured_circuit_with_traps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = CmCircuit::single(CliffordOp::h(1, 0), 1).unwrap();
        let (key, gc) = qgarble(&q, q.shape(), 2, &mut rng).unwrap();
        let branches = qgeval_exact(&key.encode(&DensityMatrix::zeros(1), 2).unwrap(), &gc).unwrap();
        assert_eq!(branches.len(), 2);
        for b in branches {
            assert!((b.probability - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn simulated_evaluation_returns_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = CircuitShape::new(3, vec![1, 1]).unwrap();
        let y = DensityMatrix::named("+i").unwrap();
        let (xt, gc) = qgsim(&y, &shape, 1, &mut rng).unwrap();
        let run = qgeval(&xt, &gc, &mut rng).unwrap();
        assert!(trace_distance(&run.output, &y).unwrap() < 1e-10);
        assert!((run.trap_probability - 1.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_branches_match_plain_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let first = CliffordOp::h(2, 0).compose(&CliffordOp::cnot(2, 1, 0).unwrap()).unwrap();
        let mut m = BTreeMap::new();
        m.insert("0".to_string(), CliffordOp::identity(1));
        m.insert("1".to_string(), CliffordOp::x(1, 0));
        let q = CmCircuit::new(
            2,
            vec![
                CmLayer {
                    selector: Selector::Fixed(first),
                    measured: 1,
                },
                CmLayer {
                    selector: Selector::Adaptive(m),
                    measured: 0,
                },
            ],
        )
        .unwrap();
        let x = DensityMatrix::named("+").unwrap().tensor(&DensityMatrix::named("-i").unwrap());
        let plain = crate::clifford::branches_to_cq(&cm_eval_exact(&q, &x).unwrap(), 1, 1).unwrap();
        for lambda in [0, 2] {
            let (key, gc) = qgarble(&q, q.shape(), lambda, &mut rng).unwrap();
            let br = qgeval_exact(&key.encode(&x, lambda).unwrap(), &gc).unwrap();
            let garbled = crate::clifford::branches_to_cq(&br, 1, 1).unwrap();
            assert!(trace_distance(&plain, &garbled).unwrap() < 1e-10);
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = CmCircuit::identity(2);
        let other = CircuitShape::new(2, vec![1]).unwrap();
        assert!(qgarble(&q, &other, 0, &mut rng).is_err());
        assert!(qgsim(&DensityMatrix::zeros(2), &other, 0, &mut rng).is_err());
    }
}
