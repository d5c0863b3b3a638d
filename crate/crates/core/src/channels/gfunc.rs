use crate::error::{Error, Result};
use crate::qmat::{partial_trace, ComplexMatrix, DensityMatrix};

/// `Tr_{A,B}[((ρ1 ⊗ ρ3) ⊗ 1_C) ρ2]`.
///
/// The result is generally subnormalized: with `ρ2 = Υ/Tr(Υ)` its trace is `1/Tr(Υ)`.
pub fn g_functionality(rho1: &DensityMatrix, rho2: &DensityMatrix, rho3: &DensityMatrix) -> Result<ComplexMatrix> {
    g_functionality_n(rho1, rho2, std::slice::from_ref(rho3))
}

/// Multi-party form with A-side input `ρ1 ⊗ ρ3 ⊗ … ⊗ ρ_{n+1}`.
pub fn g_functionality_n(rho1: &DensityMatrix, rho2: &DensityMatrix, rest: &[DensityMatrix]) -> Result<ComplexMatrix> {
    let side = rest.iter().fold(rho1.matrix().clone(), |acc, r| acc.kron(r.matrix()));
    let din = side.rows();
    if !rho2.dim().is_multiple_of(din) {
        return Err(Error::DimensionMismatch {
            expected: din,
            got: rho2.dim(),
        });
    }
    let dc = rho2.dim() / din;
    let lifted = side.kron(&ComplexMatrix::identity(dc));
    partial_trace(&(&lifted * rho2.matrix()), &[din, dc], &[false, true])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_of_channel, KrausChannel};

    #[test]
    fn depolarizing_on_plus() {
        let plus = DensityMatrix::named("+").unwrap();
        for p in [0.0, 0.3, 0.7, 1.0] {
            let choi = choi_of_channel(&KrausChannel::depolarizing(p).unwrap());
            let g = g_functionality(&plus.transpose(), &choi.normalized().unwrap(), &DensityMatrix::empty()).unwrap();
            let expected = &plus.matrix().scale_real(p) + &ComplexMatrix::identity(2).scale_real((1.0 - p) / 2.0);
            assert!(g.scale_real(choi.trace()).approx_eq(&expected, 1e-14));
        }
    }

    #[test]
    fn product_state_factorizes() {
        let a = DensityMatrix::named("+").unwrap();
        let b = DensityMatrix::named("1").unwrap();
        let c = DensityMatrix::named("+i").unwrap();
        let r1 = DensityMatrix::named("0").unwrap();
        let r3 = DensityMatrix::named("-i").unwrap();
        let rho2 = DensityMatrix::tensor_all([&a, &b, &c]);
        let g = g_functionality(&r1, &rho2, &r3).unwrap();
        let f = (r1.matrix() * a.matrix()).trace().re * (r3.matrix() * b.matrix()).trace().re;
        assert!(g.approx_eq(&c.matrix().scale_real(f), 1e-14));
    }

    #[test]
    fn mismatched_dims() {
        let r = DensityMatrix::zeros(2);
        assert!(g_functionality(&r, &DensityMatrix::zeros(1), &DensityMatrix::empty()).is_err());
    }
}
