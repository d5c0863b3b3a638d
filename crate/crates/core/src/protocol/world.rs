use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{bit_string, branches_to_cq, int_to_bits, CliffordOp, CmBranch, PauliOp};
use crate::error::{Error, Result};
use crate::qmat::{sample, ComplexMatrix, DensityMatrix};

/// Widest joint state a world will hold.
pub const MAX_WORLD_QUBITS: usize = 11;

/// How measurements are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Keep every outcome as a weighted branch.
    Exact,
    /// Sample one outcome per measurement.
    Sampled,
}

/// Opaque handle to one qubit of the world.
pub type Wire = usize;

#[derive(Clone, Debug)]
pub struct Branch {
    pub probability: f64,
    pub records: BTreeMap<String, Vec<bool>>,
    pub state: DensityMatrix,
}

impl Branch {
    pub fn record(&self, name: &str) -> &[bool] {
        self.records.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Joint quantum state of every register in one protocol execution.
#[derive(Clone, Debug)]
pub struct World {
    mode: Mode,
    /// Position of each live handle inside the branch states.
    slots: Vec<Option<usize>>,
    branches: Vec<Branch>,
}

impl World {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            slots: Vec::new(),
            branches: vec![Branch {
                probability: 1.0,
                records: BTreeMap::new(),
                state: DensityMatrix::empty(),
            }],
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn qubits(&self) -> usize {
        self.branches[0].state.qubits()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    fn positions(&self, wires: &[Wire]) -> Result<Vec<usize>> {
        wires
            .iter()
            .map(|&w| {
                self.slots
                    .get(w)
                    .copied()
                    .flatten()
                    .ok_or_else(|| Error::Protocol(format!("wire {w} is not live")))
            })
            .collect()
    }

    /// Appends a fresh register holding `rho`.
    pub fn alloc(&mut self, rho: &DensityMatrix) -> Result<Vec<Wire>> {
        let base = self.qubits();
        if base + rho.qubits() > MAX_WORLD_QUBITS {
            return Err(Error::InstanceTooLarge(format!(
                "{} qubits exceed the {MAX_WORLD_QUBITS}-qubit world",
                base + rho.qubits()
            )));
        }
        let first = self.slots.len();
        let rho = rho.clone().relabel((first..first + rho.qubits()).map(|w| format!("w{w}")).collect())?;
        for b in &mut self.branches {
            b.state = b.state.tensor(&rho);
        }
        self.slots.extend((0..rho.qubits()).map(|i| Some(base + i)));
        Ok((first..first + rho.qubits()).collect())
    }

    /// Traces out `wires`; their handles become dead.
    pub fn release(&mut self, wires: &[Wire]) -> Result<()> {
        let pos = self.positions(wires)?;
        let n = self.qubits();
        let keep: Vec<bool> = (0..n).map(|q| !pos.contains(&q)).collect();
        for b in &mut self.branches {
            b.state = b.state.reduce(&keep)?;
        }
        for &w in wires {
            self.slots[w] = None;
        }
        for p in self.slots.iter_mut().flatten() {
            *p -= pos.iter().filter(|&&q| q < *p).count();
        }
        Ok(())
    }

    pub fn apply_unitary(&mut self, wires: &[Wire], u: &ComplexMatrix) -> Result<()> {
        let pos = self.positions(wires)?;
        for b in &mut self.branches {
            b.state = b.state.apply_on(&pos, u)?;
        }
        Ok(())
    }

    pub fn apply(&mut self, wires: &[Wire], c: &CliffordOp) -> Result<()> {
        if c.qubits() != wires.len() {
            return Err(Error::DimensionMismatch {
                expected: wires.len(),
                got: c.qubits(),
            });
        }
        self.apply_unitary(wires, c.unitary())
    }

    pub fn apply_pauli(&mut self, wires: &[Wire], p: &PauliOp) -> Result<()> {
        if p.qubits() != wires.len() {
            return Err(Error::DimensionMismatch {
                expected: wires.len(),
                got: p.qubits(),
            });
        }
        self.apply_unitary(wires, &p.matrix())
    }

    /// Applies a Clifford chosen from each branch's classical records.
    pub fn apply_adaptive<F>(&mut self, wires: &[Wire], choose: F) -> Result<()>
    where
        F: Fn(&Branch) -> Result<CliffordOp>,
    {
        let pos = self.positions(wires)?;
        for b in &mut self.branches {
            let c = choose(b)?;
            if c.qubits() != wires.len() {
                return Err(Error::DimensionMismatch {
                    expected: wires.len(),
                    got: c.qubits(),
                });
            }
            b.state = b.state.apply_on(&pos, c.unitary())?;
        }
        Ok(())
    }

    /// Computational-basis measurement of `wires`; the bits are appended to
    /// record `name` and the wires stay in place, collapsed.
    pub fn measure<R: Rng + ?Sized>(&mut self, wires: &[Wire], name: &str, rng: &mut R) -> Result<()> {
        let pos = self.positions(wires)?;
        let k = wires.len();
        let mut next = Vec::new();
        for b in std::mem::take(&mut self.branches) {
            let outcomes: Vec<(usize, f64, Option<DensityMatrix>)> = (0..1usize << k)
                .map(|o| b.state.project(&pos, o).map(|(p, s)| (o, p, s)))
                .collect::<Result<_>>()?;
            let chosen: Vec<&(usize, f64, Option<DensityMatrix>)> = match self.mode {
                Mode::Exact => outcomes.iter().filter(|o| o.2.is_some()).collect(),
                Mode::Sampled => {
                    let total: f64 = outcomes.iter().map(|o| o.1).sum();
                    let probs: Vec<f64> = outcomes.iter().map(|o| o.1 / total).collect();
                    vec![&outcomes[sample(&probs, rng)?]]
                }
            };
            for (o, p, s) in chosen {
                let mut records = b.records.clone();
                records.entry(name.to_string()).or_default().extend(int_to_bits(*o, k));
                let probability = match self.mode {
                    Mode::Exact => b.probability * p,
                    Mode::Sampled => b.probability,
                };
                next.push(Branch {
                    probability,
                    records,
                    state: s.clone().expect("chosen outcome has support"),
                });
            }
        }
        self.branches = next;
        Ok(())
    }

    /// Sets record `name` in every branch from the branch's other records.
    pub fn derive_record<F>(&mut self, name: &str, f: F)
    where
        F: Fn(&Branch) -> Vec<bool>,
    {
        for b in &mut self.branches {
            let v = f(b);
            b.records.insert(name.to_string(), v);
        }
    }

    /// Keeps the branches satisfying `keep`, renormalized; returns their weight.
    pub fn condition<F>(&mut self, keep: F) -> Result<f64>
    where
        F: Fn(&Branch) -> bool,
    {
        let total: f64 = self.branches.iter().filter(|b| keep(b)).map(|b| b.probability).sum();
        if total <= 1e-14 {
            return Err(Error::Protocol("conditioning on an event of probability zero".into()));
        }
        self.branches.retain(|b| keep(b));
        for b in &mut self.branches {
            b.probability /= total;
        }
        Ok(total)
    }

    /// Weight of the branches satisfying `pred`.
    pub fn probability<F>(&self, pred: F) -> f64
    where
        F: Fn(&Branch) -> bool,
    {
        self.branches.iter().filter(|b| pred(b)).map(|b| b.probability).sum()
    }

    /// Branch-averaged reduced state of `wires`, in the listed order.
    pub fn reduced(&self, wires: &[Wire]) -> Result<DensityMatrix> {
        let pos = self.positions(wires)?;
        let parts: Vec<(f64, DensityMatrix)> = self
            .branches
            .iter()
            .map(|b| Ok((b.probability, b.state.reduce_to(&pos)?)))
            .collect::<Result<_>>()?;
        DensityMatrix::mixture(&parts)
    }

    /// `Σ_b p_b |r_b⟩⟨r_b| ⊗ ρ_b(wires)` where `r_b` is record `name`.
    pub fn cq_state(&self, name: &str, bits: usize, wires: &[Wire]) -> Result<DensityMatrix> {
        let pos = self.positions(wires)?;
        let mut merged: BTreeMap<String, (Vec<bool>, f64, ComplexMatrix)> = BTreeMap::new();
        for b in &self.branches {
            let r = b.record(name).to_vec();
            let reduced = b.state.reduce_to(&pos)?;
            let entry = merged
                .entry(bit_string(&r))
                .or_insert_with(|| (r.clone(), 0.0, ComplexMatrix::zeros(reduced.dim(), reduced.dim())));
            entry.1 += b.probability;
            entry.2 = &entry.2 + &reduced.matrix().scale_real(b.probability);
        }
        let branches: Vec<CmBranch> = merged
            .into_values()
            .map(|(outcomes, p, m)| {
                Ok(CmBranch {
                    outcomes,
                    probability: p,
                    output: DensityMatrix::new_unchecked(m.scale_real(1.0 / p), vec![String::new(); wires.len()])?,
                })
            })
            .collect::<Result<_>>()?;
        branches_to_cq(&branches, bits, wires.len())
    }

    /// Distribution of record `name` over all branches.
    pub fn record_distribution(&self, name: &str) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for b in &self.branches {
            *out.entry(bit_string(b.record(name))).or_insert(0.0) += b.probability;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::trace_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_across_registers() {
        let mut w = World::new(Mode::Exact);
        let a = w.alloc(&DensityMatrix::zeros(1)).unwrap();
        let b = w.alloc(&DensityMatrix::zeros(1)).unwrap();
        w.apply(&a, &CliffordOp::h(1, 0)).unwrap();
        w.apply(&[a[0], b[0]], &CliffordOp::cnot(2, 0, 1).unwrap()).unwrap();
        let rb = w.reduced(&b).unwrap();
        assert!(trace_distance(&rb, &DensityMatrix::maximally_mixed(1)).unwrap() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        w.measure(&a, "m", &mut rng).unwrap();
        assert_eq!(w.branches().len(), 2);
        let cq = w.cq_state("m", 1, &b).unwrap();
        assert!((cq.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((cq.matrix()[(3, 3)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn release_shifts_handles() {
        let mut w = World::new(Mode::Sampled);
        let a = w.alloc(&DensityMatrix::named("+").unwrap()).unwrap();
        let b = w.alloc(&DensityMatrix::named("1").unwrap()).unwrap();
        w.release(&a).unwrap();
        assert_eq!(w.qubits(), 1);
        let rb = w.reduced(&b).unwrap();
        assert!((rb.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(w.reduced(&a).is_err());
    }

    #[test]
    fn sampled_mode_keeps_one_branch() {
        let mut w = World::new(Mode::Sampled);
        let a = w.alloc(&DensityMatrix::named("+").unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        w.measure(&a, "m", &mut rng).unwrap();
        assert_eq!(w.branches().len(), 1);
        assert_eq!(w.branches()[0].record("m").len(), 1);
    }
}
