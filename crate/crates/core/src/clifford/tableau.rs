use serde::{Deserialize, Serialize};

use super::pauli::PauliOp;
use crate::error::{Error, Result};
use crate::qmat::{permute_qubits, ComplexMatrix, DensityMatrix, C64, ZERO};

/// An n-qubit Clifford, stored as the images of the Pauli generators
/// together with a dense unitary realizing them (up to a global phase).
///
/// `images[j]` is `C X_j C†` and `images[n + j]` is `C Z_j C†`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "CliffordRepr", try_from = "CliffordRepr")]
pub struct CliffordOp {
    n: usize,
    images: Vec<PauliOp>,
    unitary: ComplexMatrix,
}

/// Serialized form: the images only; the unitary is re-synthesized on load.
#[derive(Serialize, Deserialize)]
struct CliffordRepr {
    n: usize,
    images: Vec<PauliOp>,
}

impl From<CliffordOp> for CliffordRepr {
    fn from(c: CliffordOp) -> Self {
        Self { n: c.n, images: c.images }
    }
}

impl TryFrom<CliffordRepr> for CliffordOp {
    type Error = Error;

    fn try_from(r: CliffordRepr) -> Result<Self> {
        CliffordOp::from_images(r.n, r.images)
    }
}

impl PartialEq for CliffordOp {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.images == other.images
    }
}

fn hermitian_phase(x: u64, z: u64, sign: bool) -> u8 {
    ((x & z).count_ones() as u8 + if sign { 2 } else { 0 }) % 4
}

impl CliffordOp {
    pub fn identity(n: usize) -> Self {
        let images = (0..n)
            .map(|j| PauliOp::single(n, j, 'X'))
            .chain((0..n).map(|j| PauliOp::single(n, j, 'Z')))
            .collect();
        Self {
            n,
            images,
            unitary: ComplexMatrix::identity(1 << n),
        }
    }

    /// Builds a Clifford from generator images, synthesizing the unitary.
    pub fn from_images(n: usize, images: Vec<PauliOp>) -> Result<Self> {
        if images.len() != 2 * n || images.iter().any(|p| p.qubits() != n) {
            return Err(Error::Shape(format!("expected {} images on {n} qubits", 2 * n)));
        }
        for p in &images {
            if p.phase() % 2 != ((p.x_mask() & p.z_mask()).count_ones() % 2) as u8 {
                return Err(Error::Shape(format!("image {} is not Hermitian", p.label())));
            }
        }
        if !commutation_preserved(n, &images) {
            return Err(Error::Shape("images do not form a symplectic basis".into()));
        }
        let unitary = synthesize(n, &images);
        Ok(Self { n, images, unitary })
    }

    /// Builds from a symplectic bit table in `(x | z)` row layout and sign bits.
    pub fn from_tableau(n: usize, rows: &[Vec<bool>], signs: &[bool]) -> Result<Self> {
        if rows.len() != 2 * n || signs.len() != 2 * n || rows.iter().any(|r| r.len() != 2 * n) {
            return Err(Error::Shape(format!("tableau must be {0}x{0}", 2 * n)));
        }
        let images = rows
            .iter()
            .zip(signs)
            .map(|(row, &sign)| {
                let p = PauliOp::from_bits(&row[..n], &row[n..]).expect("equal halves");
                PauliOp::from_masks(n, p.x_mask(), p.z_mask(), hermitian_phase(p.x_mask(), p.z_mask(), sign))
            })
            .collect();
        Self::from_images(n, images)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn images(&self) -> &[PauliOp] {
        &self.images
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// The `2n × 2n` GF(2) matrix whose rows are the images in `(x | z)` form.
    pub fn symplectic(&self) -> Vec<Vec<bool>> {
        self.images
            .iter()
            .map(|p| {
                (0..self.n)
                    .map(|q| p.x_bit(q))
                    .chain((0..self.n).map(|q| p.z_bit(q)))
                    .collect()
            })
            .collect()
    }

    /// Sign bit of each image relative to its Hermitian Pauli.
    pub fn phase_bits(&self) -> Vec<bool> {
        self.images
            .iter()
            .map(|p| p.phase() != hermitian_phase(p.x_mask(), p.z_mask(), false))
            .collect()
    }

    pub fn is_symplectic(&self) -> bool {
        commutation_preserved(self.n, &self.images)
    }

    /// Key identifying the Clifford up to global phase.
    pub fn key(&self) -> Vec<(u64, u64, u8)> {
        self.images.iter().map(|p| (p.x_mask(), p.z_mask(), p.phase())).collect()
    }

    /// `C P C†` computed from the tableau.
    pub fn conjugate_pauli(&self, p: &PauliOp) -> PauliOp {
        let n = self.n;
        let mut out = PauliOp::from_masks(n, 0, 0, p.phase());
        for q in 0..n {
            if p.x_bit(q) {
                out = out.compose(&self.images[q]);
            }
        }
        for q in 0..n {
            if p.z_bit(q) {
                out = out.compose(&self.images[n + q]);
            }
        }
        out
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let images = other.images.iter().map(|p| self.conjugate_pauli(p)).collect();
        Ok(Self {
            n: self.n,
            images,
            unitary: &self.unitary * &other.unitary,
        })
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        next.compose(self)
    }

    pub fn inverse(&self) -> Self {
        let n = self.n;
        let s = self.symplectic();
        // S⁻¹ = Ω Sᵀ Ω with Ω swapping the x and z halves
        let omega = |i: usize| if i < n { i + n } else { i - n };
        let images = (0..2 * n)
            .map(|g| {
                let row: Vec<bool> = (0..2 * n).map(|c| s[omega(c)][omega(g)]).collect();
                let p = PauliOp::from_bits(&row[..n], &row[n..]).expect("equal halves");
                let candidate =
                    PauliOp::from_masks(n, p.x_mask(), p.z_mask(), hermitian_phase(p.x_mask(), p.z_mask(), false));
                let back = self.conjugate_pauli(&candidate);
                if back.phase() == 0 {
                    candidate
                } else {
                    PauliOp::from_masks(n, p.x_mask(), p.z_mask(), candidate.phase() + 2)
                }
            })
            .collect();
        Self {
            n,
            images,
            unitary: self.unitary.dagger(),
        }
    }

    /// `self ⊗ other`, `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        let (na, nb) = (self.n, other.n);
        let ia = PauliOp::identity(na);
        let ib = PauliOp::identity(nb);
        let mut images = Vec::with_capacity(2 * (na + nb));
        for j in 0..na {
            images.push(self.images[j].tensor(&ib));
        }
        for j in 0..nb {
            images.push(ia.tensor(&other.images[j]));
        }
        for j in 0..na {
            images.push(self.images[na + j].tensor(&ib));
        }
        for j in 0..nb {
            images.push(ia.tensor(&other.images[nb + j]));
        }
        Self {
            n: na + nb,
            images,
            unitary: self.unitary.kron(&other.unitary),
        }
    }

    /// Qubit permutation: new position `p` carries old qubit `order[p]`.
    pub fn permutation(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &o in order {
            if o >= n || std::mem::replace(&mut seen[o], true) {
                return Err(Error::Layout(format!("{order:?} is not a permutation")));
            }
        }
        let d = 1usize << n;
        let mut unitary = ComplexMatrix::zeros(d, d);
        for b in 0..d {
            let image = (0..n).fold(0usize, |acc, p| (acc << 1) | ((b >> (n - 1 - order[p])) & 1));
            unitary[(image, b)] = C64::new(1.0, 0.0);
        }
        let mut images = vec![PauliOp::identity(n); 2 * n];
        for (p, &old) in order.iter().enumerate() {
            images[old] = PauliOp::single(n, p, 'X');
            images[n + old] = PauliOp::single(n, p, 'Z');
        }
        Ok(Self { n, images, unitary })
    }

    /// `Π C Π†` for the permutation `order`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let pi = Self::permutation(order)?;
        let images = {
            let inv = pi.inverse();
            // (Π C Π†) g (Π C Π†)† = Π C (Π† g Π) C† Π†
            let pc = pi.compose(self)?;
            let mut imgs = Vec::with_capacity(2 * self.n);
            for g in Self::identity(self.n).images {
                imgs.push(pc.conjugate_pauli(&inv.conjugate_pauli(&g)));
            }
            imgs
        };
        Ok(Self {
            n: self.n,
            images,
            unitary: permute_qubits(&self.unitary, order)?,
        })
    }

    /// Embeds `self` to act on `positions` of an `n_total`-qubit register.
    pub fn embed(&self, n_total: usize, positions: &[usize]) -> Result<Self> {
        if positions.len() != self.n || positions.iter().any(|&p| p >= n_total) {
            return Err(Error::Shape(format!(
                "cannot place a {}-qubit Clifford on {positions:?} of {n_total}",
                self.n
            )));
        }
        let mut seen = vec![false; n_total];
        for &p in positions {
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Shape(format!("repeated position {p}")));
            }
        }
        let mut order = vec![usize::MAX; n_total];
        for (i, &p) in positions.iter().enumerate() {
            order[p] = i;
        }
        for (slot, next) in order.iter_mut().filter(|s| **s == usize::MAX).zip(self.n..) {
            *slot = next;
        }
        self.tensor(&Self::identity(n_total - self.n)).permuted(&order)
    }

    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.unitary.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.unitary.rows(),
                got: m.rows(),
            });
        }
        Ok(m.conjugate_by(&self.unitary))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.apply_unitary(&self.unitary)
    }

    /// Largest entry deviation between dense `C P C†` and the tableau image,
    /// over all generators.
    pub fn consistency_error(&self) -> f64 {
        let id = Self::identity(self.n);
        id.images
            .iter()
            .zip(&self.images)
            .map(|(g, img)| g.matrix().conjugate_by(&self.unitary).max_abs_diff(&img.matrix()))
            .fold(0.0, f64::max)
    }

    pub fn h(n: usize, q: usize) -> Self {
        single_qubit(n, q, PauliOp::single(1, 0, 'Z'), PauliOp::single(1, 0, 'X'))
    }

    pub fn s(n: usize, q: usize) -> Self {
        single_qubit(n, q, PauliOp::single(1, 0, 'Y'), PauliOp::single(1, 0, 'Z'))
    }

    pub fn sdg(n: usize, q: usize) -> Self {
        single_qubit(n, q, PauliOp::from_masks(1, 1, 1, 3), PauliOp::single(1, 0, 'Z'))
    }

    pub fn x(n: usize, q: usize) -> Self {
        single_qubit(n, q, PauliOp::single(1, 0, 'X'), PauliOp::from_masks(1, 0, 1, 2))
    }

    pub fn z(n: usize, q: usize) -> Self {
        single_qubit(n, q, PauliOp::from_masks(1, 1, 0, 2), PauliOp::single(1, 0, 'Z'))
    }

    pub fn cnot(n: usize, control: usize, target: usize) -> Result<Self> {
        // X_c → X_c X_t, Z_t → Z_c Z_t
        let images = vec![
            PauliOp::from_masks(2, 0b11, 0, 0),
            PauliOp::single(2, 1, 'X'),
            PauliOp::single(2, 0, 'Z'),
            PauliOp::from_masks(2, 0, 0b11, 0),
        ];
        Self::from_images(2, images)?.embed(n, &[control, target])
    }

    pub fn swap(n: usize, a: usize, b: usize) -> Result<Self> {
        Self::permutation(&[1, 0])?.embed(n, &[a, b])
    }

    /// `P` as a Clifford.
    pub fn from_pauli(p: &PauliOp) -> Self {
        let n = p.qubits();
        let id = Self::identity(n);
        let images = id
            .images
            .iter()
            .map(|g| if g.commutes_with(p) { g.clone() } else { PauliOp::from_masks(n, g.x_mask(), g.z_mask(), g.phase() + 2) })
            .collect();
        Self {
            n,
            images,
            unitary: p.matrix(),
        }
    }
}

fn single_qubit(n: usize, q: usize, x_image: PauliOp, z_image: PauliOp) -> CliffordOp {
    CliffordOp::from_images(1, vec![x_image, z_image])
        .and_then(|c| c.embed(n, &[q]))
        .expect("valid single-qubit tableau")
}

fn commutation_preserved(n: usize, images: &[PauliOp]) -> bool {
    for a in 0..2 * n {
        for b in (a + 1)..2 * n {
            let should_anticommute = a + n == b;
            if images[a].commutes_with(&images[b]) == should_anticommute {
                return false;
            }
        }
    }
    true
}

/// Columns `U|x⟩ = (U Xˣ U†) U|0⟩`, with `U|0⟩` the joint +1 eigenvector of the Z images.
fn synthesize(n: usize, images: &[PauliOp]) -> ComplexMatrix {
    let d = 1usize << n;
    let project = |mut v: Vec<C64>| {
        for z in &images[n..] {
            let pv = z.apply_vec(&v);
            for (a, b) in v.iter_mut().zip(pv) {
                *a = (*a + b) * 0.5;
            }
        }
        v
    };
    let mut psi = Vec::new();
    for b in 0..d {
        let mut e = vec![ZERO; d];
        e[b] = C64::new(1.0, 0.0);
        let v = project(e);
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            psi = v.into_iter().map(|a| a / norm).collect();
            break;
        }
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for x in 0..d {
        let mut col = psi.clone();
        for q in 0..n {
            if (x >> (n - 1 - q)) & 1 == 1 {
                col = images[q].apply_vec(&col);
            }
        }
        for (r, a) in col.into_iter().enumerate() {
            u[(r, x)] = a;
        }
    }
    u
}
