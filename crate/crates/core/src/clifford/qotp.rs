use super::pauli::PauliOp;
use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, DensityMatrix};

fn pad(rho: &DensityMatrix, a: &[bool], b: &[bool]) -> Result<PauliOp> {
    if a.len() != rho.qubits() {
        return Err(Error::DimensionMismatch {
            expected: rho.qubits(),
            got: a.len(),
        });
    }
    PauliOp::from_bits(a, b)
}

/// `XᵃZᵇ ρ ZᵇXᵃ`.
pub fn qotp_encrypt(rho: &DensityMatrix, a: &[bool], b: &[bool]) -> Result<DensityMatrix> {
    let p = pad(rho, a, b)?;
    DensityMatrix::new_unchecked(p.conjugate(rho.matrix()), rho.labels().to_vec())
}

/// Inverse of [`qotp_encrypt`]; Pauli conjugation is an involution.
pub fn qotp_decrypt(rho: &DensityMatrix, a: &[bool], b: &[bool]) -> Result<DensityMatrix> {
    qotp_encrypt(rho, a, b)
}

/// `4⁻ⁿ Σ_P P M P†` over all `4ⁿ` Pauli keys, enumerated explicitly.
pub fn pauli_twirl(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = crate::qmat::qubits_of(m.rows())?;
    if n > 10 {
        return Err(Error::InstanceTooLarge(format!("{n}-qubit Pauli twirl")));
    }
    let d = 1u64 << n;
    let mut acc = ComplexMatrix::zeros(m.rows(), m.cols());
    for x in 0..d {
        for z in 0..d {
            acc = &acc + &PauliOp::from_masks(n, x, z, 0).conjugate(m);
        }
    }
    Ok(acc.scale_real(1.0 / (d * d) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flips_and_phases() {
        let zero = DensityMatrix::named("0").unwrap();
        let one = qotp_encrypt(&zero, &[true], &[false]).unwrap();
        assert!(one.matrix().approx_eq(DensityMatrix::named("1").unwrap().matrix(), 1e-15));
        let plus = DensityMatrix::named("+").unwrap();
        let minus = qotp_encrypt(&plus, &[false], &[true]).unwrap();
        assert!(minus.matrix().approx_eq(DensityMatrix::named("-").unwrap().matrix(), 1e-15));
    }

    #[test]
    fn twirl_is_fully_depolarizing() {
        let rho = DensityMatrix::named("T").unwrap().tensor(&DensityMatrix::named("+i").unwrap());
        let avg = pauli_twirl(rho.matrix()).unwrap();
        assert!(avg.approx_eq(&ComplexMatrix::identity(4).scale_real(0.25), 1e-15));
    }

    #[test]
    fn length_mismatch() {
        let rho = DensityMatrix::zeros(2);
        assert!(qotp_encrypt(&rho, &[true], &[true]).is_err());
        assert!(qotp_encrypt(&rho, &[true, false], &[true]).is_err());
    }
}
