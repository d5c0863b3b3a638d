//! Uniform sampling over the n-qubit Clifford group (Bravyi–Maslov canonical form).

use rand::Rng;

use super::tableau::CliffordOp;

type Bits = Vec<Vec<bool>>;

fn eye(n: usize) -> Bits {
    (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect()
}

fn zeros(r: usize, c: usize) -> Bits {
    vec![vec![false; c]; r]
}

fn matmul(a: &Bits, b: &Bits) -> Bits {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| (0..inner).fold(false, |acc, k| acc ^ (row[k] & b[k][c])))
                .collect()
        })
        .collect()
}

fn transpose(a: &Bits) -> Bits {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|c| a.iter().map(|r| r[c]).collect()).collect()
}

/// Inverse of a unit lower-triangular GF(2) matrix by forward substitution.
fn inverse_unit_lower(l: &Bits) -> Bits {
    let n = l.len();
    let mut inv = eye(n);
    for i in 0..n {
        for j in 0..i {
            // inv[i][j] = Σ_{k=j}^{i-1} l[i][k] inv[k][j]
            let v = (j..i).fold(false, |acc, k| acc ^ (l[i][k] & inv[k][j]));
            inv[i][j] = v;
        }
    }
    inv
}

fn block(tl: &Bits, tr: &Bits, bl: &Bits, br: &Bits) -> Bits {
    tl.iter()
        .zip(tr)
        .map(|(a, b)| a.iter().chain(b).copied().collect())
        .chain(bl.iter().zip(br).map(|(a, b)| a.iter().chain(b).copied().collect()))
        .collect()
}

fn fill_lower<R: Rng + ?Sized>(m: &mut Bits, rng: &mut R, symmetric: bool) {
    let n = m.len();
    for i in 0..n {
        for j in 0..i {
            let v: bool = rng.gen();
            m[i][j] = v;
            if symmetric {
                m[j][i] = v;
            }
        }
    }
}

/// Hadamard layer and permutation drawn from the quantum Mallows distribution.
fn sample_qmallows<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Vec<bool>, Vec<usize>) {
    let mut had = vec![false; n];
    let mut perm = vec![0usize; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let m = (n - i) as i32;
        let eps = 4f64.powi(-m);
        let r: f64 = rng.gen();
        let index = -((r + (1.0 - r) * eps).log2().ceil() as i64);
        let index = (index as i32).min(2 * m - 1);
        had[i] = index < m;
        let k = if index < m { index } else { 2 * m - index - 1 } as usize;
        perm[i] = remaining.remove(k);
    }
    (had, perm)
}

/// Draws a uniformly random n-qubit Clifford, deterministic given the rng state.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordOp {
    if n == 0 {
        return CliffordOp::identity(0);
    }
    let (had, perm) = sample_qmallows(n, rng);

    let mut gamma1 = zeros(n, n);
    let mut gamma2 = zeros(n, n);
    for i in 0..n {
        gamma1[i][i] = rng.gen();
    }
    for i in 0..n {
        gamma2[i][i] = rng.gen();
    }
    let mut delta1 = eye(n);
    let mut delta2 = eye(n);
    fill_lower(&mut gamma1, rng, true);
    fill_lower(&mut gamma2, rng, true);
    fill_lower(&mut delta1, rng, false);
    fill_lower(&mut delta2, rng, false);

    let zero = zeros(n, n);
    let prod1 = matmul(&gamma1, &delta1);
    let prod2 = matmul(&gamma2, &delta2);
    let inv1 = transpose(&inverse_unit_lower(&delta1));
    let inv2 = transpose(&inverse_unit_lower(&delta2));
    let table1 = block(&delta1, &zero, &prod1, &inv1);
    let table2 = block(&delta2, &zero, &prod2, &inv2);

    let mut table: Bits = perm
        .iter()
        .copied()
        .chain(perm.iter().map(|p| p + n))
        .map(|r| table2[r].clone())
        .collect();
    let swapped = table.clone();
    for q in (0..n).filter(|&q| had[q]) {
        table[q] = swapped[q + n].clone();
        table[q + n] = swapped[q].clone();
    }

    let rows = matmul(&table1, &table);
    let signs: Vec<bool> = (0..2 * n).map(|_| rng.gen()).collect();
    CliffordOp::from_tableau(n, &rows, &signs).expect("canonical form is symplectic")
}
