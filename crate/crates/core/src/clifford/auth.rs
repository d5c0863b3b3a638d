use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tableau::CliffordOp;
use crate::error::{Error, Result};
use crate::qmat::DensityMatrix;

/// `C(ρ ⊗ |0^λ⟩⟨0^λ|)C†`, traps placed after the data qubits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuthCiphertext {
    pub payload: DensityMatrix,
    pub lambda: usize,
}

/// Result of checking the traps of a ciphertext.
#[derive(Clone, Debug)]
pub struct AuthVerification {
    pub accept: bool,
    /// Probability that every trap reads 0.
    pub accept_probability: f64,
    /// Data register after the trap measurement, conditioned on `accept`.
    pub state: Option<DensityMatrix>,
}

pub fn auth_encode(c: &CliffordOp, rho: &DensityMatrix, lambda: usize) -> Result<AuthCiphertext> {
    if c.qubits() != rho.qubits() + lambda {
        return Err(Error::DimensionMismatch {
            expected: rho.qubits() + lambda,
            got: c.qubits(),
        });
    }
    let padded = rho.tensor(&DensityMatrix::zeros(lambda));
    Ok(AuthCiphertext {
        payload: c.apply(&padded)?,
        lambda,
    })
}

/// Probability that the trailing `lambda` qubits read all-zero, with the
/// conditional and complementary post-measurement data states.
pub fn split_traps(
    decoded: &DensityMatrix,
    lambda: usize,
) -> Result<(f64, Option<DensityMatrix>, Option<DensityMatrix>)> {
    let n = decoded.qubits();
    if lambda > n {
        return Err(Error::Layout(format!("{lambda} traps on a {n}-qubit register")));
    }
    if lambda == 0 {
        return Ok((1.0, Some(decoded.clone()), None));
    }
    let data = n - lambda;
    let order: Vec<usize> = (data..n).chain(0..data).collect();
    let front = decoded.permute(&order)?;
    let (p_ok, ok) = front.measure_prefix(lambda, 0)?;
    let reject = if p_ok < 1.0 - 1e-14 {
        let mut parts = Vec::new();
        for o in 1..(1usize << lambda) {
            let (p, post) = front.measure_prefix(lambda, o)?;
            if let Some(s) = post {
                parts.push((p, s));
            }
        }
        let total: f64 = parts.iter().map(|(p, _)| p).sum();
        let parts: Vec<_> = parts.into_iter().map(|(p, s)| (p / total, s)).collect();
        Some(DensityMatrix::mixture(&parts)?)
    } else {
        None
    };
    Ok((p_ok, ok, reject))
}

/// Exact verification: reports the acceptance probability and the accepted state.
pub fn auth_verify(c: &CliffordOp, ct: &AuthCiphertext) -> Result<AuthVerification> {
    let decoded = c.inverse().apply(&ct.payload)?;
    let (p, ok, _) = split_traps(&decoded, ct.lambda)?;
    Ok(AuthVerification {
        accept: p > 0.5,
        accept_probability: p,
        state: ok,
    })
}

/// Sampled verification: one trap measurement.
pub fn auth_verify_sampled<R: Rng + ?Sized>(
    c: &CliffordOp,
    ct: &AuthCiphertext,
    rng: &mut R,
) -> Result<AuthVerification> {
    let decoded = c.inverse().apply(&ct.payload)?;
    let (p, ok, reject) = split_traps(&decoded, ct.lambda)?;
    let accept = rng.gen::<f64>() < p;
    Ok(AuthVerification {
        accept,
        accept_probability: p,
        state: if accept { ok } else { reject },
    })
}
