use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use super::{TAU_H, TAU_P, TAU_T};
use crate::error::{Error, Result};

/// Reduced matrix over the subsystems flagged in `keep`.
///
/// `dims` lists subsystem dimensions, most significant first.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[bool]) -> Result<ComplexMatrix> {
    if dims.len() != keep.len() {
        return Err(Error::Layout(format!(
            "{} subsystem dims but {} keep flags",
            dims.len(),
            keep.len()
        )));
    }
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::Layout(format!(
            "layout dimension {total} does not match {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let kept_dim: usize = dims.iter().zip(keep).filter(|(_, k)| **k).map(|(d, _)| d).product();
    let traced_dim = total / kept_dim;

    // full_index[kept * traced_dim + traced]
    let mut full_index = vec![0usize; total];
    for full in 0..total {
        let mut rem = full;
        let (mut kept, mut traced) = (0usize, 0usize);
        let (mut kept_stride, mut traced_stride) = (1usize, 1usize);
        for (d, k) in dims.iter().zip(keep).rev() {
            let digit = rem % d;
            rem /= d;
            if *k {
                kept += digit * kept_stride;
                kept_stride *= d;
            } else {
                traced += digit * traced_stride;
                traced_stride *= d;
            }
        }
        full_index[kept * traced_dim + traced] = full;
    }

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for i in 0..kept_dim {
        for j in 0..kept_dim {
            let mut acc = ZERO;
            for t in 0..traced_dim {
                acc += m[(full_index[i * traced_dim + t], full_index[j * traced_dim + t])];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reorders qubits so that new position `p` carries old qubit `order[p]`.
pub fn permute_qubits(m: &ComplexMatrix, order: &[usize]) -> Result<ComplexMatrix> {
    let n = order.len();
    if m.rows() != 1 << n || !m.is_square() {
        return Err(Error::Layout(format!("{n}-qubit permutation on {}x{} matrix", m.rows(), m.cols())));
    }
    let mut seen = vec![false; n];
    for &o in order {
        if o >= n || seen[o] {
            return Err(Error::Layout(format!("{order:?} is not a permutation")));
        }
        seen[o] = true;
    }
    let map = |new_idx: usize| -> usize {
        let mut old = 0usize;
        for (p, &o) in order.iter().enumerate() {
            let bit = (new_idx >> (n - 1 - p)) & 1;
            old |= bit << (n - 1 - o);
        }
        old
    };
    let idx: Vec<usize> = (0..1 << n).map(map).collect();
    Ok(ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(idx[r], idx[c])]))
}

/// Unit-trace PSD operator over a labeled qubit register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    labels: Vec<String>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, labels: Vec<String>) -> Result<Self> {
        let dm = Self::new_unchecked(matrix, labels)?;
        dm.validate()?;
        Ok(dm)
    }

    /// Checks only the shape; used for states produced by exact channel algebra.
    pub fn new_unchecked(matrix: ComplexMatrix, labels: Vec<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        if matrix.rows() != 1 << labels.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << labels.len(),
                got: matrix.rows(),
            });
        }
        Ok(Self { matrix, labels })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let n = qubits_of(matrix.rows())?;
        Self::new(matrix, default_labels("q", n))
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.matrix.hermiticity_error();
        if h > TAU_H {
            return Err(Error::NotHermitian(h));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TAU_T || tr.im.abs() > TAU_T {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min = self.matrix.eigenvalues_hermitian()?.first().copied().unwrap_or(0.0);
        if min < -TAU_P {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidTrace(0.0));
        }
        let v: Vec<C64> = amplitudes.iter().map(|a| a / norm).collect();
        let n = qubits_of(v.len())?;
        Self::new_unchecked(ComplexMatrix::outer(&v, &v), default_labels("q", n))
    }

    /// Computational basis state `|bits⟩`, first bit most significant.
    pub fn basis(bits: &[bool]) -> Self {
        let n = bits.len();
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut m = ComplexMatrix::zeros(1 << n, 1 << n);
        m[(idx, idx)] = ONE;
        Self {
            matrix: m,
            labels: default_labels("q", n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::basis(&vec![false; n])
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1 << n;
        Self {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            labels: default_labels("q", n),
        }
    }

    /// Zero-qubit register (the scalar 1).
    pub fn empty() -> Self {
        Self {
            matrix: ComplexMatrix::identity(1),
            labels: Vec::new(),
        }
    }

    /// Single-qubit named state: `0 1 + - +i -i T`.
    pub fn named(name: &str) -> Result<Self> {
        let h = FRAC_1_SQRT_2;
        let amps = match name {
            "0" => [ONE, ZERO],
            "1" => [ZERO, ONE],
            "+" => [C64::new(h, 0.0), C64::new(h, 0.0)],
            "-" => [C64::new(h, 0.0), C64::new(-h, 0.0)],
            "+i" => [C64::new(h, 0.0), C64::new(0.0, h)],
            "-i" => [C64::new(h, 0.0), C64::new(0.0, -h)],
            "T" => [C64::new(h, 0.0), C64::from_polar(h, std::f64::consts::FRAC_PI_4)],
            other => return Err(Error::OutOfRange(format!("unknown state name {other:?}"))),
        };
        Self::pure(&amps)
    }

    /// Pure qubit state at Bloch angles `(theta, phi)`.
    pub fn bloch(theta: f64, phi: f64) -> Result<Self> {
        Self::pure(&[
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn with_labels(mut self, prefix: &str) -> Self {
        self.labels = default_labels(prefix, self.qubits());
        self
    }

    pub fn relabel(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Kronecker product, labels of `self` first.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Self {
            matrix: self.matrix.kron(&other.matrix),
            labels,
        }
    }

    pub fn tensor_all<'a>(parts: impl IntoIterator<Item = &'a DensityMatrix>) -> Self {
        parts
            .into_iter()
            .fold(Self::empty(), |acc, p| acc.tensor(p))
    }

    /// Keeps the qubits whose flag is set.
    pub fn reduce(&self, keep: &[bool]) -> Result<Self> {
        let dims = vec![2; self.qubits()];
        let m = partial_trace(&self.matrix, &dims, keep)?;
        let labels = self
            .labels
            .iter()
            .zip(keep)
            .filter(|(_, k)| **k)
            .map(|(l, _)| l.clone())
            .collect();
        Ok(Self { matrix: m, labels })
    }

    /// Keeps qubits `range`, tracing out the rest.
    pub fn keep_range(&self, start: usize, len: usize) -> Result<Self> {
        let keep: Vec<bool> = (0..self.qubits()).map(|q| q >= start && q < start + len).collect();
        self.reduce(&keep)
    }

    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let m = permute_qubits(&self.matrix, order)?;
        let labels = order.iter().map(|&o| self.labels[o].clone()).collect();
        Ok(Self { matrix: m, labels })
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            labels: self.labels.clone(),
        }
    }

    pub fn apply_unitary(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.rows(),
            });
        }
        Ok(Self {
            matrix: self.matrix.conjugate_by(u),
            labels: self.labels.clone(),
        })
    }

    /// Probability and normalized post-state of finding the first `k`
    /// qubits in computational basis state `outcome`. The post-state is
    /// over the remaining qubits; `None` when the probability vanishes.
    pub fn measure_prefix(&self, k: usize, outcome: usize) -> Result<(f64, Option<Self>)> {
        let n = self.qubits();
        if k > n || outcome >= 1 << k {
            return Err(Error::Shape(format!("cannot measure {k} of {n} qubits")));
        }
        let rest = 1 << (n - k);
        let base = outcome * rest;
        let block = ComplexMatrix::from_fn(rest, rest, |r, c| self.matrix[(base + r, base + c)]);
        let p = block.trace().re;
        let labels = self.labels[k..].to_vec();
        if p <= 1e-14 {
            return Ok((p.max(0.0), None));
        }
        Ok((
            p,
            Some(Self {
                matrix: block.scale_real(1.0 / p),
                labels,
            }),
        ))
    }

    /// Sum of `weight · state`; all parts must share a dimension.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDistribution("empty mixture".into()))?;
        let mut acc = ComplexMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, s) in parts {
            if s.dim() != first.1.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.1.dim(),
                    got: s.dim(),
                });
            }
            acc = &acc + &s.matrix.scale_real(*w);
        }
        Ok(Self {
            matrix: acc,
            labels: first.1.labels.clone(),
        })
    }

    /// Rescales to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t.abs() < 1e-15 {
            return Err(Error::InvalidTrace(t));
        }
        Ok(Self {
            matrix: self.matrix.scale_real(1.0 / t),
            labels: self.labels.clone(),
        })
    }
}

/// `½‖a − b‖₁`
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    matrix_trace_distance(a.matrix(), b.matrix())
}

pub fn matrix_trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.rows(),
        });
    }
    Ok(((a - b).trace_norm_hermitian()? / 2.0).clamp(0.0, 1.0))
}

pub fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn qubits_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Layout(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}
