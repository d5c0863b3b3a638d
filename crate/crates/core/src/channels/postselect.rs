use rand::Rng;

use super::choi::ChoiMatrix;
use crate::error::{Error, Result};
use crate::qmat::{default_labels, partial_trace, ComplexMatrix, DensityMatrix, Povm, TAU_P};

/// Attempts allowed before post-selection gives up.
pub const RETRY_CAP: u64 = 1_000_000;

/// `{I − ρ, ρ}` for outcomes 0 and 1.
pub fn povm_pair(rho: &DensityMatrix) -> Result<Povm> {
    let max = *rho.matrix().eigenvalues_hermitian()?.last().expect("non-empty");
    if max > 1.0 + TAU_P {
        return Err(Error::InvalidPovm(format!("eigenvalue {max} exceeds 1")));
    }
    let id = ComplexMatrix::identity(rho.dim());
    Povm::new(vec![&id - rho.matrix(), rho.matrix().clone()])
}

/// Conditional outcome of one post-selection round, computed exactly.
#[derive(Clone, Debug)]
pub struct PostSelectExact {
    /// Per-attempt probability of outcome 1; `1/Tr(Υ)` for trace-preserving channels.
    pub success_probability: f64,
    /// C-register state given success.
    pub state: Option<DensityMatrix>,
}

#[derive(Clone, Debug)]
pub struct PostSelectRun {
    pub success: bool,
    pub state: Option<DensityMatrix>,
    pub attempts: u64,
    pub success_probability: f64,
}

fn joint_input(choi: &ChoiMatrix, rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<DensityMatrix> {
    let joint = rho_a.transpose().tensor(&rho_b.transpose());
    if joint.qubits() != choi.in_qubits() {
        return Err(Error::DimensionMismatch {
            expected: choi.in_qubits(),
            got: joint.qubits(),
        });
    }
    Ok(joint)
}

/// Prepares `Υ/Tr(Υ)`, measures the AB register with `{I − ρ, ρ}` where
/// `ρ = ρ_Aᵀ ⊗ ρ_Bᵀ`, and returns the success branch.
pub fn post_select_exact(choi: &ChoiMatrix, rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<PostSelectExact> {
    let rho = joint_input(choi, rho_a, rho_b)?;
    let povm = povm_pair(&rho)?;
    let din = rho.dim();
    let dout = 1usize << choi.out_qubits();
    let sigma = choi.normalized()?;
    let root = povm.elements()[1].sqrt_psd(TAU_P)?.kron(&ComplexMatrix::identity(dout));
    let post = sigma.matrix().conjugate_by(&root);
    let c = partial_trace(&post, &[din, dout], &[false, true])?;
    let p = c.trace().re;
    let state = if p > 1e-14 {
        Some(DensityMatrix::new_unchecked(c.scale_real(1.0 / p), default_labels("c", choi.out_qubits()))?)
    } else {
        None
    };
    Ok(PostSelectExact {
        success_probability: p,
        state,
    })
}

/// Repeats the round until outcome 1 appears or [`RETRY_CAP`] attempts pass.
pub fn post_select_eval<R: Rng + ?Sized>(
    choi: &ChoiMatrix,
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    rng: &mut R,
) -> Result<PostSelectRun> {
    post_select_eval_capped(choi, rho_a, rho_b, RETRY_CAP, rng)
}

pub fn post_select_eval_capped<R: Rng + ?Sized>(
    choi: &ChoiMatrix,
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    cap: u64,
    rng: &mut R,
) -> Result<PostSelectRun> {
    let exact = post_select_exact(choi, rho_a, rho_b)?;
    for attempt in 1..=cap {
        if rng.gen::<f64>() < exact.success_probability {
            return Ok(PostSelectRun {
                success: true,
                state: exact.state,
                attempts: attempt,
                success_probability: exact.success_probability,
            });
        }
    }
    Err(Error::RetryCapExceeded(cap))
}

/// Number of successes in `attempts` independent single rounds.
pub fn post_select_successes<R: Rng + ?Sized>(
    choi: &ChoiMatrix,
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    attempts: u64,
    rng: &mut R,
) -> Result<u64> {
    let p = post_select_exact(choi, rho_a, rho_b)?.success_probability;
    Ok((0..attempts).filter(|_| rng.gen::<f64>() < p).count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_via_choi, choi_of_channel, KrausChannel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_for_basis_and_plus() {
        let zero = DensityMatrix::zeros(1);
        let povm = povm_pair(&zero).unwrap();
        assert!(povm.elements()[0].approx_eq(DensityMatrix::named("1").unwrap().matrix(), 1e-15));
        let plus = DensityMatrix::named("+").unwrap();
        let povm = povm_pair(&plus).unwrap();
        assert!(povm.elements()[0].approx_eq(DensityMatrix::named("-").unwrap().matrix(), 1e-15));
    }

    #[test]
    fn depolarizing_conditional_state() {
        let p = 0.3;
        let choi = choi_of_channel(&KrausChannel::depolarizing(p).unwrap());
        let rho = DensityMatrix::named("+i").unwrap();
        let out = post_select_exact(&choi, &rho, &DensityMatrix::empty()).unwrap();
        assert!((out.success_probability - 0.5).abs() < 1e-12);
        let expected = apply_via_choi(&choi, &rho).unwrap();
        assert!(out.state.unwrap().matrix().approx_eq(expected.matrix(), 1e-12));
    }

    #[test]
    fn zero_probability_hits_cap() {
        // a channel whose Choi matrix has no support on ρᵀ ⊗ I
        let choi = ChoiMatrix::new(DensityMatrix::basis(&[true, false]).into_matrix(), 1, 1).unwrap();
        let zero = DensityMatrix::zeros(1);
        let err = post_select_eval_capped(&choi, &zero, &DensityMatrix::empty(), 100, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(err.unwrap_err(), Error::RetryCapExceeded(100));
    }
}
