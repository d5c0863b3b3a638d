use std::collections::{HashSet, VecDeque};

use super::tableau::CliffordOp;
use crate::error::{Error, Result};

/// Clifford group sizes modulo global phase, `2^{n²+2n} Π (4^j − 1)`.
pub fn clifford_group_size(n: usize) -> u128 {
    let mut size: u128 = 1 << (n * n + 2 * n);
    for j in 1..=n as u32 {
        size *= 4u128.pow(j) - 1;
    }
    size
}

/// Every `n`-qubit Clifford (up to phase), by breadth-first search over
/// `H`, `S` and `CNOT`. Limited to `n ≤ 2`.
pub fn enumerate_cliffords(n: usize) -> Result<Vec<CliffordOp>> {
    if n > 2 {
        return Err(Error::InstanceTooLarge(format!("enumerating the {n}-qubit Clifford group")));
    }
    let mut gens = Vec::new();
    for q in 0..n {
        gens.push(CliffordOp::h(n, q));
        gens.push(CliffordOp::s(n, q));
    }
    for c in 0..n {
        for t in 0..n {
            if c != t {
                gens.push(CliffordOp::cnot(n, c, t)?);
            }
        }
    }
    let start = CliffordOp::identity(n);
    let mut seen = HashSet::from([start.key()]);
    let mut queue = VecDeque::from([start.clone()]);
    let mut all = vec![start];
    while let Some(c) = queue.pop_front() {
        for g in &gens {
            let next = g.compose(&c)?;
            if seen.insert(next.key()) {
                all.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(clifford_group_size(1), 24);
        assert_eq!(clifford_group_size(2), 11520);
        assert_eq!(enumerate_cliffords(1).unwrap().len(), 24);
        assert!(enumerate_cliffords(3).is_err());
    }
}
