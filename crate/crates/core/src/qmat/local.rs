use super::density::DensityMatrix;
use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Splits full indices into (sub-register value, rest value) and back.
struct WireSplit {
    sub: Vec<usize>,
    rest: Vec<usize>,
    compose: Vec<usize>,
    rest_dim: usize,
}

impl WireSplit {
    fn new(n: usize, wires: &[usize]) -> Result<Self> {
        let mut seen = vec![false; n];
        for &w in wires {
            if w >= n || seen[w] {
                return Err(Error::Layout(format!("wires {wires:?} invalid for {n} qubits")));
            }
            seen[w] = true;
        }
        let others: Vec<usize> = (0..n).filter(|q| !seen[*q]).collect();
        let k = wires.len();
        let rest_dim = 1usize << others.len();
        let d = 1usize << n;
        let mut sub = vec![0; d];
        let mut rest = vec![0; d];
        let mut compose = vec![0; d];
        for idx in 0..d {
            let bit = |q: usize| (idx >> (n - 1 - q)) & 1;
            let s = wires.iter().fold(0, |acc, &w| (acc << 1) | bit(w));
            let r = others.iter().fold(0, |acc, &w| (acc << 1) | bit(w));
            sub[idx] = s;
            rest[idx] = r;
            compose[s * rest_dim + r] = idx;
        }
        debug_assert_eq!(1usize << k, d / rest_dim);
        Ok(Self {
            sub,
            rest,
            compose,
            rest_dim,
        })
    }
}

impl DensityMatrix {
    /// `(u ⊗ I) ρ (u† ⊗ I)` with `u` acting on `wires` in the listed order.
    pub fn apply_on(&self, wires: &[usize], u: &ComplexMatrix) -> Result<Self> {
        let n = self.qubits();
        if u.rows() != 1 << wires.len() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 1 << wires.len(),
                got: u.rows(),
            });
        }
        let split = WireSplit::new(n, wires)?;
        let d = self.dim();
        let dw = u.rows();
        let m = self.matrix();
        let mut left = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            let (a, r) = (split.sub[i], split.rest[i]);
            for b in 0..dw {
                let coeff = u[(a, b)];
                if coeff == ZERO {
                    continue;
                }
                let src = split.compose[b * split.rest_dim + r];
                for j in 0..d {
                    left[(i, j)] += coeff * m[(src, j)];
                }
            }
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let (a, r) = (split.sub[j], split.rest[j]);
            for b in 0..dw {
                let coeff = u[(a, b)].conj();
                if coeff == ZERO {
                    continue;
                }
                let src = split.compose[b * split.rest_dim + r];
                for i in 0..d {
                    out[(i, j)] += left[(i, src)] * coeff;
                }
            }
        }
        DensityMatrix::new_unchecked(out, self.labels().to_vec())
    }

    /// Projects `wires` onto `outcome` without removing them. Returns the
    /// probability and the normalized post-state, `None` below 1e-14.
    pub fn project(&self, wires: &[usize], outcome: usize) -> Result<(f64, Option<Self>)> {
        let split = WireSplit::new(self.qubits(), wires)?;
        if outcome >= 1 << wires.len() {
            return Err(Error::OutOfRange(format!("outcome {outcome} on {} wires", wires.len())));
        }
        let d = self.dim();
        let m = self.matrix();
        let p: f64 = (0..d).filter(|&i| split.sub[i] == outcome).map(|i| m[(i, i)].re).sum();
        if p <= 1e-14 {
            return Ok((p.max(0.0), None));
        }
        let post = ComplexMatrix::from_fn(d, d, |i, j| {
            if split.sub[i] == outcome && split.sub[j] == outcome {
                m[(i, j)].unscale(p)
            } else {
                ZERO
            }
        });
        Ok((p, Some(DensityMatrix::new_unchecked(post, self.labels().to_vec())?)))
    }

    /// Reduced state on `wires`, in the listed order.
    pub fn reduce_to(&self, wires: &[usize]) -> Result<Self> {
        let n = self.qubits();
        let _ = WireSplit::new(n, wires)?;
        let mut order = wires.to_vec();
        order.extend((0..n).filter(|q| !wires.contains(q)));
        self.permute(&order)?.keep_range(0, wires.len())
    }
}

#[cfg(test)]
mod tests {
    use crate::clifford::CliffordOp;
    use crate::qmat::{trace_distance, DensityMatrix};

    #[test]
    fn local_action_matches_embedding() {
        let rho = DensityMatrix::tensor_all([
            &DensityMatrix::named("+").unwrap(),
            &DensityMatrix::named("1").unwrap(),
            &DensityMatrix::named("+i").unwrap(),
        ]);
        let c = CliffordOp::cnot(2, 0, 1).unwrap();
        let local = rho.apply_on(&[2, 0], c.unitary()).unwrap();
        let full = c.embed(3, &[2, 0]).unwrap().apply(&rho).unwrap();
        assert!(trace_distance(&local, &full).unwrap() < 1e-12);
    }

    #[test]
    fn projection_keeps_width() {
        let rho = DensityMatrix::named("+").unwrap().tensor(&DensityMatrix::zeros(1));
        let (p, post) = rho.project(&[0], 1).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let post = post.unwrap();
        assert_eq!(post.qubits(), 2);
        assert!((post.matrix()[(2, 2)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ordered_reduction() {
        let rho = DensityMatrix::named("1").unwrap().tensor(&DensityMatrix::zeros(1));
        let r = rho.reduce_to(&[1, 0]).unwrap();
        assert!((r.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }
}
