use qpfe_core::channels::KrausChannel;
use qpfe_core::clifford::{enumerate_cliffords, CliffordOp, CmCircuit, PauliOp};
use qpfe_core::harness::{compare_views, Role, ViewDistribution};
use qpfe_core::idealfunc::{ChannelSpec, Scheme2Layout};
use qpfe_core::protocol::{
    bob_hybrid, bob_view, hybrid_replay, scheme1_replay, sim_bob, AdversarySpec, Averaging, HybridLevel, Mode,
    Scheme1Instance, Scheme2Instance, Scheme2Keys, SchemeId, Tamper, M_B2,
};
use qpfe_core::qmat::DensityMatrix;
use qpfe_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn alice_side_instance(lambda: usize) -> Scheme2Instance {
    Scheme2Instance {
        layout: Scheme2Layout { n_a: 1, n_b: 1, m_a: 1, k: 0, lambda },
        q: CmCircuit::single(CliffordOp::cnot(2, 1, 0).unwrap(), 0).unwrap(),
        x_a: DensityMatrix::named("+").unwrap(),
        x_b: DensityMatrix::named("1").unwrap(),
    }
}

fn bob_side_instance(lambda: usize) -> Scheme2Instance {
    Scheme2Instance {
        layout: Scheme2Layout { n_a: 1, n_b: 0, m_a: 1, k: 0, lambda },
        q: CmCircuit::single(CliffordOp::h(1, 0).compose(&CliffordOp::s(1, 0)).unwrap(), 0).unwrap(),
        x_a: DensityMatrix::bloch(0.7, 0.2).unwrap(),
        x_b: DensityMatrix::empty(),
    }
}

fn ladder(side: Role, inst: &Scheme2Instance, adv: &AdversarySpec, seed: u64) -> Vec<ViewDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    HybridLevel::ladder(SchemeId::Scheme2)
        .into_iter()
        .map(|l| hybrid_replay(l, side, inst, adv, Averaging::Exact, &mut rng).unwrap())
        .collect()
}

fn assert_flat(views: &[ViewDistribution], tol: f64) {
    for (i, pair) in views.windows(2).enumerate() {
        let r = compare_views(&format!("H{i}-H{}", i + 1), &pair[0], &pair[1]).unwrap();
        assert!(r.max <= tol, "{r:?}");
    }
    let end = compare_views("H0-sim", &views[0], views.last().unwrap()).unwrap();
    assert!(end.max <= tol, "{end:?}");
}

#[test]
fn alice_ladder_is_flat() {
    for lambda in [0, 3] {
        let inst = alice_side_instance(lambda);
        assert_flat(&ladder(Role::Alice, &inst, &AdversarySpec::semi_honest(Role::Alice), 1), 1e-9);
        let sub = AdversarySpec::malicious(Role::Alice).with_substitute(DensityMatrix::named("-i").unwrap());
        assert_flat(&ladder(Role::Alice, &inst, &sub, 2), 1e-9);
    }
}

#[test]
fn bob_ladder_is_flat() {
    for lambda in [0, 3] {
        let inst = bob_side_instance(lambda);
        assert_flat(&ladder(Role::Bob, &inst, &AdversarySpec::semi_honest(Role::Bob), 3), 1e-9);
    }
}

#[test]
fn orbit_average_matches_key_enumeration() {
    let inst = bob_side_instance(0);
    let adv = AdversarySpec::semi_honest(Role::Bob);
    let group = enumerate_cliffords(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut views = Vec::new();
    for c_in in &group {
        for c_out in &group {
            let keys = Scheme2Keys {
                c_b_in: None,
                c_a_in: Some(c_in.clone()),
                c_a_out: Some(c_out.clone()),
            };
            let run = bob_hybrid(0, &inst, &adv, &keys, Mode::Exact, &mut rng).unwrap();
            views.push(bob_view(&run, 1, false).unwrap());
        }
    }
    let enumerated = ViewDistribution::average(&views).unwrap();
    let level = HybridLevel::new(SchemeId::Scheme2, 0).unwrap();
    let orbit = hybrid_replay(level, Role::Bob, &inst, &adv, Averaging::Exact, &mut rng).unwrap();
    assert!(compare_views("orbit", &enumerated, &orbit).unwrap().max < 1e-12);
}

#[test]
fn monte_carlo_endpoint_is_close() {
    let inst = bob_side_instance(0);
    let adv = AdversarySpec::semi_honest(Role::Bob);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let real = hybrid_replay(HybridLevel::new(SchemeId::Scheme2, 0).unwrap(), Role::Bob, &inst, &adv, Averaging::MonteCarlo(2000), &mut rng)
        .unwrap();
    let sim = hybrid_replay(HybridLevel::new(SchemeId::Scheme2, 4).unwrap(), Role::Bob, &inst, &adv, Averaging::MonteCarlo(2000), &mut rng)
        .unwrap();
    let r = compare_views("mc", &real, &sim).unwrap();
    assert!(r.max < 0.08, "{r:?}");
    assert_eq!(r.samples, [2000, 2000]);
}

#[test]
fn exact_averaging_refuses_tampering() {
    let adv = AdversarySpec::malicious(Role::Bob).with_tamper(Tamper {
        label: M_B2.into(),
        pauli: Some(PauliOp::single(4, 3, 'X')),
        classical_xor: Vec::new(),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let level = HybridLevel::new(SchemeId::Scheme2, 0).unwrap();
    let err = hybrid_replay(level, Role::Bob, &bob_side_instance(3), &adv, Averaging::Exact, &mut rng);
    assert!(matches!(err, Err(Error::Protocol(_))));
}

#[test]
fn simulator_trap_check_rejects_tampering() {
    let inst = bob_side_instance(3);
    let adv = AdversarySpec::malicious(Role::Bob).with_tamper(Tamper {
        label: M_B2.into(),
        pauli: Some(PauliOp::single(4, 3, 'X')),
        classical_xor: Vec::new(),
    });
    let trials = 400;
    let mut accepted = 0.0;
    for seed in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        accepted += sim_bob(&inst, &adv, &Scheme2Keys::default(), Mode::Exact, &mut rng)
            .unwrap()
            .accept_probability;
    }
    // A conjugated non-identity Pauli on 4 qubits misses the 3 trap X bits in 31 of 255 cases.
    let rate = accepted / trials as f64;
    let expected = 31.0 / 255.0;
    let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
    assert!((rate - expected).abs() < 5.0 * sigma, "{rate}");
}

#[test]
fn levels_out_of_range() {
    assert!(HybridLevel::new(SchemeId::Scheme2, 5).is_err());
    assert!(HybridLevel::new(SchemeId::Scheme1, 2).is_err());
    let big = Scheme2Instance {
        layout: Scheme2Layout { n_a: 2, n_b: 2, m_a: 2, k: 0, lambda: 0 },
        q: CmCircuit::identity(4),
        x_a: DensityMatrix::zeros(2),
        x_b: DensityMatrix::zeros(2),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let level = HybridLevel::new(SchemeId::Scheme2, 1).unwrap();
    let err = hybrid_replay(level, Role::Alice, &big, &AdversarySpec::honest(), Averaging::Exact, &mut rng);
    assert!(matches!(err, Err(Error::InstanceTooLarge(_))));
}

#[test]
fn scheme1_real_matches_simulator() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inst = Scheme1Instance {
        channel: ChannelSpec::Kraus(KrausChannel::random(2, 2, 2, &mut rng)),
        rho_a: DensityMatrix::named("+").unwrap(),
        rho_b: DensityMatrix::named("0").unwrap(),
        split: 1,
    };
    let adv = AdversarySpec::malicious(Role::Bob).with_substitute(DensityMatrix::named("-").unwrap());
    let views: Vec<_> = HybridLevel::ladder(SchemeId::Scheme1)
        .into_iter()
        .map(|l| scheme1_replay(l, &inst, &adv, &mut rng).unwrap())
        .collect();
    assert!(compare_views("s1", &views[0], &views[1]).unwrap().max < 1e-10);
}
