use serde::{Deserialize, Serialize};

use super::kraus::KrausChannel;
use crate::error::{Error, Result};
use crate::qmat::{default_labels, partial_trace, ComplexMatrix, DensityMatrix, TAU_H, TAU_P};

/// `Υ = Σ_{k,l} |k⟩⟨l| ⊗ E(|k⟩⟨l|)` over `H_A ⊗ H_B`, A the input copy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    in_qubits: usize,
    out_qubits: usize,
}

impl ChoiMatrix {
    /// Validates that the matrix is PSD over the stated subsystems.
    pub fn new(matrix: ComplexMatrix, in_qubits: usize, out_qubits: usize) -> Result<Self> {
        let d = 1usize << (in_qubits + out_qubits);
        if matrix.rows() != d || !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.rows(),
            });
        }
        let h = matrix.hermiticity_error();
        if h > TAU_H {
            return Err(Error::NotHermitian(h));
        }
        let min = matrix.eigenvalues_hermitian()?[0];
        if min < -TAU_P {
            return Err(Error::NotPsd(min));
        }
        Ok(Self {
            matrix,
            in_qubits,
            out_qubits,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn in_qubits(&self) -> usize {
        self.in_qubits
    }

    pub fn out_qubits(&self) -> usize {
        self.out_qubits
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Υ / Tr(Υ)` as a state over `(A, B)`.
    pub fn normalized(&self) -> Result<DensityMatrix> {
        let mut labels = default_labels("a", self.in_qubits);
        labels.extend(default_labels("b", self.out_qubits));
        DensityMatrix::new_unchecked(self.matrix.scale_real(1.0 / self.trace()), labels)
    }
}

pub fn choi_of_channel(c: &KrausChannel) -> ChoiMatrix {
    let din = 1usize << c.in_qubits();
    let dout = 1usize << c.out_qubits();
    let mut m = ComplexMatrix::zeros(din * dout, din * dout);
    for k in c.ops() {
        // (I ⊗ K)|Ω⟩, |Ω⟩ = Σ_k |kk⟩
        let v: Vec<_> = (0..din * dout).map(|idx| k[(idx % dout, idx / dout)]).collect();
        m = &m + &ComplexMatrix::outer(&v, &v);
    }
    ChoiMatrix {
        matrix: m,
        in_qubits: c.in_qubits(),
        out_qubits: c.out_qubits(),
    }
}

/// `E(ρ) = Tr_A[(ρᵀ ⊗ 1_B) Υ]`.
pub fn apply_via_choi(choi: &ChoiMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let din = 1usize << choi.in_qubits;
    let dout = 1usize << choi.out_qubits;
    if rho.dim() != din {
        return Err(Error::DimensionMismatch {
            expected: din,
            got: rho.dim(),
        });
    }
    let lifted = rho.matrix().transpose().kron(&ComplexMatrix::identity(dout));
    let out = partial_trace(&(&lifted * &choi.matrix), &[din, dout], &[false, true])?;
    let labels = if choi.in_qubits == choi.out_qubits {
        rho.labels().to_vec()
    } else {
        default_labels("out", choi.out_qubits)
    };
    DensityMatrix::new_unchecked(out, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::kraus_apply;
    use crate::qmat::{trace_distance, C64, ONE, ZERO};

    #[test]
    fn identity_choi_is_bell_projector() {
        let choi = choi_of_channel(&KrausChannel::identity(1));
        let psi = [ONE, ZERO, ZERO, ONE];
        assert!(choi.matrix().approx_eq(&ComplexMatrix::outer(&psi, &psi), 1e-15));
        assert!((choi.trace() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_choi_formula() {
        for p in [0.0, 0.4, 1.0] {
            let choi = choi_of_channel(&KrausChannel::depolarizing(p).unwrap());
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let phi = [C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)];
            let expected = &ComplexMatrix::outer(&phi, &phi).scale_real(2.0 * p)
                + &ComplexMatrix::identity(4).scale_real(2.0 * (1.0 - p) / 4.0);
            assert!(choi.matrix().approx_eq(&expected, 1e-14));
        }
    }

    #[test]
    fn round_trip_matches_kraus() {
        let c = KrausChannel::bit_flip(0.3).unwrap();
        let rho = DensityMatrix::named("+i").unwrap();
        let a = apply_via_choi(&choi_of_channel(&c), &rho).unwrap();
        let b = kraus_apply(&c, &rho).unwrap();
        assert!(trace_distance(&a, &b).unwrap() < 1e-14);
    }

    #[test]
    fn dimension_checked() {
        let choi = choi_of_channel(&KrausChannel::identity(1));
        assert!(apply_via_choi(&choi, &DensityMatrix::zeros(2)).is_err());
    }
}
