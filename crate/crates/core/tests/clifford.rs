use std::collections::{HashMap, HashSet};

use qpfe_core::clifford::{
    auth_encode, auth_verify, cm_eval_exact, compile_t_gadget, compiled_input, enumerate_cliffords, random_clifford,
    GateCircuit, PauliOp,
};
use qpfe_core::qmat::random::random_density;
use qpfe_core::qmat::{trace_distance, DensityMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn group_orders() {
    let g1 = enumerate_cliffords(1).unwrap();
    let g2 = enumerate_cliffords(2).unwrap();
    assert_eq!(g1.len(), 24);
    assert_eq!(g2.len(), 11520);
    let keys: HashSet<_> = g2.iter().map(|c| c.key()).collect();
    assert_eq!(keys.len(), 11520);
}

#[test]
fn sampler_is_uniform_on_one_qubit() {
    const N: usize = 24_000;
    let group = enumerate_cliffords(1).unwrap();
    let index: HashMap<_, _> = group.iter().enumerate().map(|(i, c)| (c.key(), i)).collect();
    let mut counts = [0usize; 24];
    let mut rng = ChaCha8Rng::seed_from_u64(401);
    for _ in 0..N {
        counts[index[&random_clifford(1, &mut rng).key()]] += 1;
    }
    let expected = N as f64 / 24.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99.9th percentile of χ² with 23 degrees of freedom.
    assert!(chi2 < 49.73, "chi2 = {chi2}");
}

#[test]
fn sampler_covers_two_qubit_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(402);
    let group: HashSet<_> = enumerate_cliffords(2).unwrap().iter().map(|c| c.key()).collect();
    for _ in 0..2000 {
        assert!(group.contains(&random_clifford(2, &mut rng).key()));
    }
}

/// Over the whole two-qubit group a non-identity Pauli attack on one data
/// qubit plus one trap becomes a uniform non-identity Pauli, and it survives
/// only if the trap part is I or Z: 7 of 15.
#[test]
fn pauli_attack_acceptance_over_the_group() {
    let group = enumerate_cliffords(2).unwrap();
    let rho = DensityMatrix::bloch(1.1, 0.4).unwrap();
    for label in ["IX", "XI", "ZZ", "YZ", "ZI"] {
        let attack = PauliOp::parse(label).unwrap();
        let mut total = 0.0;
        for c in &group {
            let mut ct = auth_encode(c, &rho, 1).unwrap();
            let m = attack.conjugate(ct.payload.matrix());
            ct.payload = DensityMatrix::new_unchecked(m, ct.payload.labels().to_vec()).unwrap();
            total += auth_verify(c, &ct).unwrap().accept_probability;
        }
        let rate = total / group.len() as f64;
        assert!((rate - 7.0 / 15.0).abs() < 1e-9, "{label}: {rate}");
        assert!(rate <= 0.5);
    }
}

#[test]
fn random_pauli_attacks_respect_trap_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(403);
    let rho = random_density(1, 2, &mut rng);
    for lambda in 1..=3 {
        let mut accepted = 0.0;
        let trials = 400;
        for _ in 0..trials {
            let c = random_clifford(1 + lambda, &mut rng);
            let mut ct = auth_encode(&c, &rho, lambda).unwrap();
            let attack = PauliOp::random_non_identity(1 + lambda, &mut rng);
            let m = attack.conjugate(ct.payload.matrix());
            ct.payload = DensityMatrix::new_unchecked(m, ct.payload.labels().to_vec()).unwrap();
            accepted += auth_verify(&c, &ct).unwrap().accept_probability;
        }
        let rate = accepted / trials as f64;
        let bound = 0.5f64.powi(lambda as i32);
        let slack = 5.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
        assert!(rate <= bound + slack, "λ={lambda}: {rate} > {bound}");
    }
}

#[test]
fn group_average_of_ciphertext_is_maximally_mixed() {
    let group = enumerate_cliffords(2).unwrap();
    let rho = DensityMatrix::named("+i").unwrap();
    let w = 1.0 / group.len() as f64;
    let parts: Vec<_> = group.iter().map(|c| (w, auth_encode(c, &rho, 1).unwrap().payload)).collect();
    let avg = DensityMatrix::mixture(&parts).unwrap();
    assert!(trace_distance(&avg, &DensityMatrix::maximally_mixed(2)).unwrap() < 1e-10);
}

#[test]
fn two_t_gates_make_s() {
    let tt = GateCircuit::parse("QUBITS 1\nT q0\nT q0\n").unwrap();
    let s = GateCircuit::parse("QUBITS 1\nS q0\n").unwrap();
    let (a, b) = (tt.direct_unitary().unwrap(), s.direct_unitary().unwrap());
    assert!(a.max_abs_diff(&b) < 1e-12);

    let compiled = compile_t_gadget(&tt).unwrap();
    assert_eq!(compiled.t_count, 2);
    let rho = DensityMatrix::bloch(0.9, 2.2).unwrap();
    let expected = s.direct_eval(&rho).unwrap();
    let branches = cm_eval_exact(&compiled.circuit, &compiled_input(&rho, 2)).unwrap();
    assert_eq!(branches.len(), 4);
    for b in &branches {
        assert!((b.probability - 0.25).abs() < 1e-12);
        assert!(trace_distance(&b.output, &expected).unwrap() < 1e-10);
    }
}
