use rand::Rng;

use super::density::DensityMatrix;
use super::matrix::ComplexMatrix;
use super::{TAU_H, TAU_P, TAU_T};
use crate::error::{Error, Result};

/// Positive operator-valued measure over a fixed dimension.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

/// One outcome of a POVM measurement.
#[derive(Clone, Debug)]
pub struct PovmOutcome {
    pub probability: f64,
    /// `None` when the outcome has zero probability.
    pub post_state: Option<DensityMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let dim = first.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(Error::InvalidPovm(format!("element {i} has the wrong shape")));
            }
            if e.hermiticity_error() > TAU_H {
                return Err(Error::InvalidPovm(format!("element {i} is not Hermitian")));
            }
            let min = e.eigenvalues_hermitian()?[0];
            if min < -TAU_P {
                return Err(Error::InvalidPovm(format!(
                    "element {i} is not PSD (min eigenvalue {min:e})"
                )));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > TAU_T {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:e}")));
        }
        Ok(Self { elements })
    }

    /// Projective measurement in the computational basis.
    pub fn computational(qubits: usize) -> Self {
        let d = 1 << qubits;
        let elements = (0..d)
            .map(|i| {
                let mut m = ComplexMatrix::zeros(d, d);
                m[(i, i)] = super::matrix::ONE;
                m
            })
            .collect();
        Self { elements }
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }
}

/// Outcome probabilities `Tr(E_i ρ)` and post-states `√E_i ρ √E_i / p_i`.
pub fn measure_povm(rho: &DensityMatrix, povm: &Povm) -> Result<Vec<PovmOutcome>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            got: rho.dim(),
        });
    }
    povm.elements
        .iter()
        .map(|e| {
            let root = e.sqrt_psd(TAU_P)?;
            let post = rho.matrix().conjugate_by(&root);
            let p = post.trace().re.max(0.0);
            let post_state = if p > 1e-14 {
                Some(DensityMatrix::new_unchecked(post.scale_real(1.0 / p), rho.labels().to_vec())?)
            } else {
                None
            };
            Ok(PovmOutcome {
                probability: p,
                post_state,
            })
        })
        .collect()
}

/// Inverse-CDF draw from a discrete distribution.
pub fn sample<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> Result<usize> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    if let Some(p) = dist.iter().find(|p| **p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > TAU_T.max(1e-9) {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, p) in dist.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    Ok(last_nonzero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn computational_on_plus() {
        let plus = DensityMatrix::named("+").unwrap();
        let out = measure_povm(&plus, &Povm::computational(1)).unwrap();
        assert!((out[0].probability - 0.5).abs() < 1e-12);
        assert!((out[1].probability - 0.5).abs() < 1e-12);
        let zero = DensityMatrix::named("0").unwrap();
        assert!(out[0].post_state.as_ref().unwrap().matrix().approx_eq(zero.matrix(), 1e-12));
    }

    #[test]
    fn projector_pair_on_its_own_state() {
        let rho = DensityMatrix::named("0").unwrap();
        let comp = &ComplexMatrix::identity(2) - rho.matrix();
        let povm = Povm::new(vec![rho.matrix().clone(), comp]).unwrap();
        let out = measure_povm(&rho, &povm).unwrap();
        assert!((out[0].probability - 1.0).abs() < 1e-12);
        assert!(out[1].post_state.is_none());
    }

    #[test]
    fn rejects_non_psd_element() {
        let bad = ComplexMatrix::from_real(2, 2, &[1.5, 0.0, 0.0, 1.0]).unwrap();
        let other = ComplexMatrix::from_real(2, 2, &[-0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(Povm::new(vec![bad, other]), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn sample_degenerate_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample(&[1.0, 0.0], &mut rng).unwrap(), 0);
        }
        let draw = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            (0..32).map(|_| sample(&[0.25, 0.25, 0.5], &mut r).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert!(sample(&[-0.1, 1.1], &mut rng).is_err());
    }

    #[test]
    fn sample_fair_coin_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 10_000;
        let ones = (0..n).filter(|_| sample(&[0.5, 0.5], &mut rng).unwrap() == 1).count();
        let sigma = (0.25f64 / n as f64).sqrt();
        assert!(((ones as f64 / n as f64) - 0.5).abs() <= 5.0 * sigma);
    }
}
