use std::collections::BTreeMap;

use proptest::prelude::*;
use qpfe_core::channels::{apply_via_choi, choi_of_channel, kraus_apply, KrausChannel};
use qpfe_core::clifford::{
    auth_encode, auth_verify, cm_eval_exact, qotp_decrypt, qotp_encrypt, random_clifford, CliffordOp, CmCircuit,
    PauliOp,
};
use qpfe_core::harness::{compare_views, ViewDistribution, ViewMethod};
use qpfe_core::protocol::{Mode, World};
use qpfe_core::qmat::random::{haar_unitary, random_density};
use qpfe_core::qmat::{trace_distance, DensityMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bits(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_states_are_valid(seed: u64, n in 1usize..4, rank in 1usize..5) {
        let rho = random_density(n, rank, &mut rng(seed));
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.matrix().hermiticity_error() < 1e-10);
        let min = rho.matrix().eigenvalues_hermitian().unwrap().into_iter().fold(f64::MAX, f64::min);
        prop_assert!(min > -1e-10);
        prop_assert!(rho.purity() <= 1.0 + 1e-10);
    }

    #[test]
    fn trace_distance_is_a_metric(seed: u64, n in 1usize..3) {
        let mut r = rng(seed);
        let a = random_density(n, 2, &mut r);
        let b = random_density(n, 2, &mut r);
        let c = random_density(n, 1, &mut r);
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= trace_distance(&a, &c).unwrap() + trace_distance(&c, &b).unwrap() + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn unitaries_preserve_distance(seed: u64, n in 1usize..3) {
        let mut r = rng(seed);
        let a = random_density(n, 2, &mut r);
        let b = random_density(n, 1, &mut r);
        let u = haar_unitary(1 << n, &mut r);
        prop_assert!(u.is_unitary(1e-10));
        let before = trace_distance(&a, &b).unwrap();
        let after = trace_distance(&a.apply_unitary(&u).unwrap(), &b.apply_unitary(&u).unwrap()).unwrap();
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product(seed: u64, na in 1usize..3, nb in 1usize..3) {
        let mut r = rng(seed);
        let a = random_density(na, 2, &mut r);
        let b = random_density(nb, 2, &mut r);
        let ab = a.tensor(&b);
        prop_assert!(trace_distance(&ab.keep_range(0, na).unwrap(), &a).unwrap() < 1e-10);
        prop_assert!(trace_distance(&ab.keep_range(na, nb).unwrap(), &b).unwrap() < 1e-10);
    }

    #[test]
    fn qotp_round_trips(seed: u64, n in 1usize..4, x: u64, z: u64) {
        let rho = random_density(n, 2, &mut rng(seed));
        let (a, b) = (bits(x, n), bits(z, n));
        let back = qotp_decrypt(&qotp_encrypt(&rho, &a, &b).unwrap(), &a, &b).unwrap();
        prop_assert!(trace_distance(&back, &rho).unwrap() < 1e-12);
    }

    #[test]
    fn qotp_average_is_maximally_mixed(seed: u64, n in 1usize..3) {
        let rho = random_density(n, 1, &mut rng(seed));
        let d = 1u64 << n;
        let w = 1.0 / (d * d) as f64;
        let parts: Vec<_> = (0..d)
            .flat_map(|x| (0..d).map(move |z| (x, z)))
            .map(|(x, z)| (w, qotp_encrypt(&rho, &bits(x, n), &bits(z, n)).unwrap()))
            .collect();
        let avg = DensityMatrix::mixture(&parts).unwrap();
        prop_assert!(trace_distance(&avg, &DensityMatrix::maximally_mixed(n)).unwrap() < 1e-12);
    }

    #[test]
    fn clifford_compose_and_inverse(seed: u64, n in 1usize..4) {
        let mut r = rng(seed);
        let a = random_clifford(n, &mut r);
        let b = random_clifford(n, &mut r);
        let id = CliffordOp::identity(n);
        prop_assert_eq!(a.compose(&a.inverse()).unwrap().key(), id.key());
        prop_assert_eq!(a.inverse().compose(&a).unwrap().key(), id.key());
        prop_assert!(a.is_symplectic());
        let ab = a.compose(&b).unwrap();
        prop_assert!(ab.consistency_error() < 1e-10);
        // Dense product up to a global phase.
        let dense = a.unitary().try_mul(b.unitary()).unwrap();
        let rho = random_density(n, 2, &mut r);
        let via_ops = ab.apply(&rho).unwrap();
        let via_dense = rho.apply_unitary(&dense).unwrap();
        prop_assert!(trace_distance(&via_ops, &via_dense).unwrap() < 1e-10);
    }

    #[test]
    fn clifford_maps_paulis_to_paulis(seed: u64, n in 1usize..4, x: u64, z: u64) {
        let mut r = rng(seed);
        let c = random_clifford(n, &mut r);
        let mask = (1u64 << n) - 1;
        let p = PauliOp::from_masks(n, x & mask, z & mask, 0);
        let image = c.conjugate_pauli(&p);
        let dense = p.matrix().conjugate_by(c.unitary());
        prop_assert!(dense.max_abs_diff(&image.matrix()) < 1e-10);
        prop_assert_eq!(image.is_identity_up_to_phase(), p.is_identity_up_to_phase());
    }

    #[test]
    fn honest_authentication_accepts(seed: u64, n in 1usize..3, lambda in 0usize..3) {
        let mut r = rng(seed);
        let rho = random_density(n, 2, &mut r);
        let c = random_clifford(n + lambda, &mut r);
        let v = auth_verify(&c, &auth_encode(&c, &rho, lambda).unwrap()).unwrap();
        prop_assert!(v.accept);
        prop_assert!((v.accept_probability - 1.0).abs() < 1e-10);
        prop_assert!(trace_distance(v.state.as_ref().unwrap(), &rho).unwrap() < 1e-10);
    }

    #[test]
    fn compare_views_is_symmetric(seed: u64, p in 0.0f64..1.0, q in 0.0f64..1.0) {
        let mut r = rng(seed);
        let view = |rho: DensityMatrix, p: f64| {
            let dist: BTreeMap<String, f64> = [("0".to_string(), p), ("1".to_string(), 1.0 - p)].into();
            ViewDistribution::new(ViewMethod::Exact, 0).quantum("m", rho).classical("c", dist)
        };
        let a = view(random_density(2, 2, &mut r), p);
        let b = view(random_density(2, 1, &mut r), q);
        let ab = compare_views("ab", &a, &b).unwrap();
        let ba = compare_views("ba", &b, &a).unwrap();
        prop_assert!((ab.max - ba.max).abs() < 1e-12);
        for (k, d) in &ab.distances {
            prop_assert!((d - ba.distances[k]).abs() < 1e-12);
        }
        prop_assert!((ab.distances["c"] - (p - q).abs()).abs() < 1e-12);
        prop_assert!(compare_views("aa", &a, &a).unwrap().max < 1e-12);
    }

    #[test]
    fn exact_branches_sum_to_one(seed: u64, n in 1usize..4, k in 1usize..4) {
        let mut r = rng(seed);
        let k = k.min(n);
        let q = CmCircuit::single(random_clifford(n, &mut r), k).unwrap();
        let branches = cm_eval_exact(&q, &random_density(n, 2, &mut r)).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);

        let mut world = World::new(Mode::Exact);
        let wires = world.alloc(&random_density(n, 3, &mut r)).unwrap();
        world.apply(&wires, &random_clifford(n, &mut r)).unwrap();
        world.measure(&wires[..k], "m", &mut r).unwrap();
        let total: f64 = world.branches().iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(world.branches().len() <= 1 << k);
    }

    #[test]
    fn choi_reproduces_kraus(seed: u64, n in 1usize..3, count in 1usize..4) {
        let mut r = rng(seed);
        let channel = KrausChannel::random(n, n, count, &mut r);
        let rho = random_density(n, 2, &mut r);
        let a = apply_via_choi(&choi_of_channel(&channel), &rho).unwrap();
        prop_assert!(trace_distance(&a, &kraus_apply(&channel, &rho).unwrap()).unwrap() < 1e-10);
    }
}
