//! The two-qubit demonstration: `F = CNOT(q1 → q2)` followed by measuring `q2`,
//! run in the clear and under a Pauli one-time pad with a `Z^s` decoy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{qotp_encrypt, CliffordOp};
use crate::error::Result;
use crate::idealfunc::{classical_pfe_a3, ExperimentKeys, CNOT_MEASURE};
use crate::qmat::{ComplexMatrix, DensityMatrix};

/// `P1 ∈ {|0⟩, |1⟩}` and `P2 ∈ {|+⟩, |−⟩}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentInputs {
    pub p1_one: bool,
    pub p2_minus: bool,
}

impl ExperimentInputs {
    pub fn all() -> [Self; 4] {
        [(false, false), (false, true), (true, false), (true, true)].map(|(p1_one, p2_minus)| Self { p1_one, p2_minus })
    }

    fn states(&self) -> (DensityMatrix, DensityMatrix) {
        let q1 = DensityMatrix::basis(&[self.p1_one]);
        let q2 = DensityMatrix::named(if self.p2_minus { "-" } else { "+" }).expect("built-in state");
        (q1, q2)
    }
}

/// Counts of outcomes 0 and 1.
pub type Histogram = [u64; 2];

fn sample<R: Rng + ?Sized>(p: [f64; 2], rng: &mut R) -> usize {
    usize::from(rng.gen::<f64>() >= p[0])
}

/// `Pr[q2 = o]` after `CNOT(q1 → q2)`, equivalently the distribution of F's output.
fn q2_distribution(rho: &DensityMatrix) -> Result<[f64; 2]> {
    let after = CliffordOp::cnot(2, 0, 1)?.apply(rho)?;
    let m = after.matrix();
    let p1 = m[(1, 1)].re + m[(3, 3)].re;
    Ok([1.0 - p1, p1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlainResult {
    pub exact: [f64; 2],
    pub histogram: Histogram,
}

pub fn experiment_plain<R: Rng + ?Sized>(inputs: ExperimentInputs, shots: u64, rng: &mut R) -> Result<PlainResult> {
    let (q1, q2) = inputs.states();
    let exact = q2_distribution(&q1.tensor(&q2))?;
    let mut histogram = [0; 2];
    for _ in 0..shots {
        histogram[sample(exact, rng)] += 1;
    }
    Ok(PlainResult { exact, histogram })
}

/// `X^{a1}Z^{b1}` on q1, `X^{a2}Z^{b2}` then `Z^s` on q2.
fn encode(inputs: ExperimentInputs, k: &ExperimentKeys) -> Result<(DensityMatrix, DensityMatrix)> {
    let (q1, q2) = inputs.states();
    let e1 = qotp_encrypt(&q1, &[k.a1], &[k.b1])?;
    let e2 = qotp_encrypt(&qotp_encrypt(&q2, &[k.a2], &[k.b2])?, &[false], &[k.s])?;
    Ok((e1, e2))
}

/// Raw and `X^{a3}`-corrected output distributions of the encrypted circuit.
pub fn encrypted_distribution(inputs: ExperimentInputs, keys: &ExperimentKeys) -> Result<([f64; 2], [f64; 2])> {
    let (e1, e2) = encode(inputs, keys)?;
    let raw = q2_distribution(&e1.tensor(&e2))?;
    let corrected = if classical_pfe_a3(keys, CNOT_MEASURE)? { [raw[1], raw[0]] } else { raw };
    Ok((raw, corrected))
}

/// What an observer without keys sees, averaged over all 32 key tuples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EavesdropperView {
    pub q1: DensityMatrix,
    pub q2: DensityMatrix,
    pub joint: DensityMatrix,
    pub raw_outcome: [f64; 2],
}

pub fn eavesdropper_view(inputs: ExperimentInputs) -> Result<EavesdropperView> {
    let keys = ExperimentKeys::all();
    let w = 1.0 / keys.len() as f64;
    let mut q1 = Vec::new();
    let mut q2 = Vec::new();
    let mut joint = Vec::new();
    let mut raw_outcome = [0.0; 2];
    for k in &keys {
        let (e1, e2) = encode(inputs, k)?;
        let (raw, _) = encrypted_distribution(inputs, k)?;
        raw_outcome[0] += w * raw[0];
        raw_outcome[1] += w * raw[1];
        joint.push((w, e1.tensor(&e2)));
        q1.push((w, e1));
        q2.push((w, e2));
    }
    Ok(EavesdropperView {
        q1: DensityMatrix::mixture(&q1)?,
        q2: DensityMatrix::mixture(&q2)?,
        joint: DensityMatrix::mixture(&joint)?,
        raw_outcome,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncryptedResult {
    /// `None` when every shot drew fresh keys.
    pub keys: Option<ExperimentKeys>,
    pub histogram: Histogram,
    pub corrected_histogram: Histogram,
    pub eavesdropper: EavesdropperView,
}

fn random_keys<R: Rng + ?Sized>(rng: &mut R) -> ExperimentKeys {
    ExperimentKeys {
        a1: rng.gen(),
        b1: rng.gen(),
        a2: rng.gen(),
        b2: rng.gen(),
        s: rng.gen(),
    }
}

pub fn experiment_encrypted<R: Rng + ?Sized>(
    inputs: ExperimentInputs,
    keys: Option<ExperimentKeys>,
    shots: u64,
    rng: &mut R,
) -> Result<EncryptedResult> {
    let mut histogram = [0; 2];
    let mut corrected_histogram = [0; 2];
    for _ in 0..shots {
        let k = keys.unwrap_or_else(|| random_keys(rng));
        let (raw, _) = encrypted_distribution(inputs, &k)?;
        let o = sample(raw, rng);
        histogram[o] += 1;
        corrected_histogram[o ^ usize::from(classical_pfe_a3(&k, CNOT_MEASURE)?)] += 1;
    }
    Ok(EncryptedResult {
        keys,
        histogram,
        corrected_histogram,
        eavesdropper: eavesdropper_view(inputs)?,
    })
}

/// Largest deviation between corrected and plain distributions over all keys and inputs.
pub fn correction_error() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for inputs in ExperimentInputs::all() {
        let (q1, q2) = inputs.states();
        let plain = q2_distribution(&q1.tensor(&q2))?;
        for k in ExperimentKeys::all() {
            let (_, corrected) = encrypted_distribution(inputs, &k)?;
            worst = worst.max((corrected[0] - plain[0]).abs()).max((corrected[1] - plain[1]).abs());
        }
    }
    Ok(worst)
}

/// `|P̂r(0) − P̂r(1)|`.
pub fn imbalance(h: &Histogram) -> f64 {
    let n = (h[0] + h[1]) as f64;
    (h[0] as f64 - h[1] as f64).abs() / n
}

/// Largest entry-wise deviation of `rho` from `I/2^n`.
pub fn distance_from_mixed(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    rho.matrix().max_abs_diff(&ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plain_outputs_are_uniform() {
        for inputs in ExperimentInputs::all() {
            let r = experiment_plain(inputs, 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            assert!((r.exact[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn correction_restores_plain_output() {
        assert!(correction_error().unwrap() < 1e-12);
    }

    #[test]
    fn uncorrected_already_uniform_on_zero_plus() {
        let inputs = ExperimentInputs { p1_one: false, p2_minus: false };
        for k in ExperimentKeys::all() {
            let (raw, _) = encrypted_distribution(inputs, &k).unwrap();
            assert!((raw[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn eavesdropper_sees_mixed_states() {
        for inputs in ExperimentInputs::all() {
            let v = eavesdropper_view(inputs).unwrap();
            assert!(distance_from_mixed(&v.q1) < 1e-12);
            assert!(distance_from_mixed(&v.q2) < 1e-12);
            assert!(distance_from_mixed(&v.joint) < 1e-12);
            assert!((v.raw_outcome[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = experiment_encrypted(ExperimentInputs { p1_one: false, p2_minus: false }, None, 1024, &mut rng).unwrap();
        assert_eq!(r.corrected_histogram.iter().sum::<u64>(), 1024);
        assert!(imbalance(&r.corrected_histogram) <= 5.0 / 32.0);
    }
}
