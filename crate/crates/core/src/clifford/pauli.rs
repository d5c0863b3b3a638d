use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{ComplexMatrix, C64, ONE, ZERO};

/// `i^phase · X^x Z^z` on `n` qubits (per-qubit X applied after Z).
///
/// Bit masks place qubit `j` at bit `n-1-j`, matching the
/// most-significant-first basis ordering used throughout.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOp {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

pub(crate) fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => ONE,
        1 => C64::new(0.0, 1.0),
        2 => -ONE,
        _ => C64::new(0.0, -1.0),
    }
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        Self { n, x: 0, z: 0, phase: 0 }
    }

    pub fn from_masks(n: usize, x: u64, z: u64, phase: u8) -> Self {
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self {
            n,
            x: x & mask,
            z: z & mask,
            phase: phase % 4,
        }
    }

    pub fn from_bits(x: &[bool], z: &[bool]) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: z.len(),
            });
        }
        let n = x.len();
        let pack = |bits: &[bool]| {
            bits.iter()
                .enumerate()
                .fold(0u64, |acc, (j, &b)| acc | ((b as u64) << (n - 1 - j)))
        };
        Ok(Self::from_masks(n, pack(x), pack(z), 0))
    }

    /// Single-qubit `X`, `Y` or `Z` on qubit `q`. `Y = i X Z`.
    pub fn single(n: usize, q: usize, kind: char) -> Self {
        let bit = 1u64 << (n - 1 - q);
        match kind {
            'X' => Self::from_masks(n, bit, 0, 0),
            'Z' => Self::from_masks(n, 0, bit, 0),
            'Y' => Self::from_masks(n, bit, bit, 1),
            _ => Self::identity(n),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_masks(n, rng.gen(), rng.gen(), 0)
    }

    /// Uniform over the `4^n - 1` non-identity Paulis (phase ignored).
    pub fn random_non_identity<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let p = Self::random(n, rng);
            if !p.is_identity_up_to_phase() {
                return p;
            }
        }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x >> (self.n - 1 - q)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z >> (self.n - 1 - q)) & 1 == 1
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Overall coefficient on `|b ⊕ x⟩` when acting on `|b⟩`.
    fn coefficient(&self, b: usize) -> C64 {
        let sign = ((self.z & b as u64).count_ones() % 2) * 2;
        i_pow(self.phase as u32 + sign)
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (b, amp) in v.iter().enumerate() {
            if *amp != ZERO {
                out[b ^ self.x as usize] = self.coefficient(b) * amp;
            }
        }
        out
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let d = 1usize << self.n;
        let mut m = ComplexMatrix::zeros(d, d);
        for b in 0..d {
            m[(b ^ self.x as usize, b)] = self.coefficient(b);
        }
        m
    }

    /// `P ρ P†` in O(d²).
    pub fn conjugate(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = rho.rows();
        let x = self.x as usize;
        // phase^k cancels between ket and bra
        let sign = |b: usize| if (self.z & b as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        ComplexMatrix::from_fn(d, d, |r, c| {
            let (br, bc) = (r ^ x, c ^ x);
            rho[(br, bc)] * (sign(br) * sign(bc))
        })
    }

    /// Product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        // X^a Z^b X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}
        let swap = ((self.z & other.x).count_ones() % 2) as u8 * 2;
        Self::from_masks(
            self.n,
            self.x ^ other.x,
            self.z ^ other.z,
            self.phase + other.phase + swap,
        )
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Tensor product, `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_masks(
            self.n + other.n,
            (self.x << other.n) | other.x,
            (self.z << other.n) | other.z,
            self.phase + other.phase,
        )
    }

    /// Inverse of [`PauliOp::label`]: one of `IXYZ` per qubit.
    pub fn parse(label: &str) -> Result<Self> {
        let n = label.chars().count();
        let (mut x, mut z) = (vec![false; n], vec![false; n]);
        for (q, ch) in label.chars().enumerate() {
            match ch.to_ascii_uppercase() {
                'I' => {}
                'X' => x[q] = true,
                'Z' => z[q] = true,
                'Y' => {
                    x[q] = true;
                    z[q] = true;
                }
                other => return Err(Error::OutOfRange(format!("{other:?} is not a Pauli letter"))),
            }
        }
        Self::from_bits(&x, &z)
    }

    pub fn label(&self) -> String {
        let mut s = String::with_capacity(self.n);
        for q in 0..self.n {
            s.push(match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            });
        }
        s
    }
}
