use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::random::random_kraus;
use crate::qmat::{default_labels, qubits_of, ComplexMatrix, DensityMatrix, C64, TAU_T};

/// CPTP map given by Kraus operators of shape `2^out × 2^in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausChannel {
    in_qubits: usize,
    out_qubits: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Shape("channel needs a Kraus operator".into()))?;
        let (dout, din) = (first.rows(), first.cols());
        let in_qubits = qubits_of(din)?;
        let out_qubits = qubits_of(dout)?;
        let mut sum = ComplexMatrix::zeros(din, din);
        for k in &ops {
            if k.rows() != dout || k.cols() != din {
                return Err(Error::DimensionMismatch {
                    expected: dout,
                    got: k.rows(),
                });
            }
            sum = &sum + &(&k.dagger() * k);
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(din));
        if dev > TAU_T {
            return Err(Error::InvalidTrace(1.0 + dev));
        }
        Ok(Self {
            in_qubits,
            out_qubits,
            ops,
        })
    }

    pub fn identity(qubits: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(1 << qubits)]).expect("identity is CPTP")
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// `E(ρ) = pρ + (1 − p) I/2` via the Pauli-mixture Kraus set.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("depolarizing parameter {p} not in [0, 1]")));
        }
        let a = ((1.0 + 3.0 * p) / 4.0).sqrt();
        let b = ((1.0 - p) / 4.0).sqrt();
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let m = |v: [C64; 4], s: f64| ComplexMatrix::from_vec(2, 2, v.to_vec()).expect("2x2").scale_real(s);
        Self::new(vec![
            m([o, z, z, o], a),
            m([z, o, o, z], b),
            m([z, -i, i, z], b),
            m([o, z, z, -o], b),
        ])
    }

    /// Flips with probability `q`: `K₀ = √(1−q) I`, `K₁ = √q X`.
    pub fn bit_flip(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::OutOfRange(format!("flip probability {q} not in [0, 1]")));
        }
        Self::new(vec![
            ComplexMatrix::identity(2).scale_real((1.0 - q).sqrt()),
            ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])?.scale_real(q.sqrt()),
        ])
    }

    pub fn random<R: Rng + ?Sized>(in_qubits: usize, out_qubits: usize, count: usize, rng: &mut R) -> Self {
        Self::new(random_kraus(1 << in_qubits, 1 << out_qubits, count, rng)).expect("isometry columns are CPTP")
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `E(M) = Σ K M K†` on an arbitrary operator.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != 1 << self.in_qubits || !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.in_qubits,
                got: m.rows(),
            });
        }
        let dout = 1 << self.out_qubits;
        let mut acc = ComplexMatrix::zeros(dout, dout);
        for k in &self.ops {
            acc = &acc + &(&(k * m) * &k.dagger());
        }
        Ok(acc)
    }
}

/// `Σ K ρ K†`.
pub fn kraus_apply(c: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = c.apply_matrix(rho.matrix())?;
    let labels = if c.in_qubits == c.out_qubits {
        rho.labels().to_vec()
    } else {
        default_labels("out", c.out_qubits)
    };
    DensityMatrix::new_unchecked(out, labels)
}
