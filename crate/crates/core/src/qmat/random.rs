//! Random states, unitaries and channels for property tests and demos.

use rand::Rng;
use rand_distr::StandardNormal;

use super::density::{default_labels, DensityMatrix};
use super::matrix::{ComplexMatrix, C64, ZERO};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary via Gram-Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut v = g.column(c);
        for q in &cols {
            let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= overlap * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

/// Random mixed state `G G† / Tr(G G†)` of the given rank.
pub fn random_density<R: Rng + ?Sized>(qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let d = 1 << qubits;
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * &g.dagger();
    let t = m.trace().re;
    DensityMatrix::new_unchecked(m.scale_real(1.0 / t), default_labels("q", qubits))
        .expect("square power-of-two matrix")
}

pub fn random_pure<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityMatrix {
    random_density(qubits, 1, rng)
}

/// Random Hermitian PSD matrix with arbitrary trace.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, dim, rng);
    &g * &g.dagger()
}

/// Kraus operators of a random CPTP map from `d_in` to `d_out` with
/// `count` operators, obtained from a random isometry.
pub fn random_kraus<R: Rng + ?Sized>(
    d_in: usize,
    d_out: usize,
    count: usize,
    rng: &mut R,
) -> Vec<ComplexMatrix> {
    let big = (d_out * count).max(d_in);
    let u = haar_unitary(big, rng);
    // first d_in columns of u form an isometry d_in -> d_out*count
    (0..count)
        .map(|k| {
            ComplexMatrix::from_fn(d_out, d_in, |r, c| {
                let row = k * d_out + r;
                if row < big {
                    u[(row, c)]
                } else {
                    ZERO
                }
            })
        })
        .collect()
}
