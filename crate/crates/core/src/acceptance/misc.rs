use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Finding;
use crate::clifford::{compile_t_gadget, enumerate_cliffords, random_clifford, GateCircuit, PauliOp};
use crate::error::Result;
use crate::harness::{correction_error, eavesdropper_view, experiment_encrypted, imbalance, ExperimentInputs};
use crate::idealfunc::Scheme2Layout;
use crate::protocol::{qcp_learn, qcp_run, repetition_rng, AdversarySpec, Mode, QcpProgram};
use crate::qmat::{trace_distance, DensityMatrix};
use crate::scenario::{
    run_scenario, AdversaryConfig, ChannelConfig, LoadedScenario, ScenarioConfig, ScenarioKind, StateLiteral,
};

pub(super) fn experiment() -> Result<Finding> {
    const N: u64 = 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC47);
    let exact = correction_error()?;
    let bound = 5.0 / (N as f64).sqrt();
    let mut worst_imb: f64 = 0.0;
    let mut worst_view: f64 = 0.0;
    for inputs in ExperimentInputs::all() {
        let r = experiment_encrypted(inputs, None, N, &mut rng)?;
        worst_imb = worst_imb.max(imbalance(&r.corrected_histogram));
        let v = eavesdropper_view(inputs)?;
        let half = DensityMatrix::maximally_mixed(1);
        worst_view = worst_view.max(trace_distance(&v.q1, &half)?).max(trace_distance(&v.q2, &half)?);
    }
    Ok(Finding::new(
        exact <= 1e-12 && worst_imb <= bound && worst_view <= 1e-12,
        format!(
            "32 keys exact {exact:.1e}; N=1024 max |P0-P1| {worst_imb:.4} (bound {bound:.4}, hardware run saw 0.012); \
             per-qubit view vs I/2 {worst_view:.1e}"
        ),
    ))
}

/// `y = x_A ⊕ b`; the swap puts Bob's wire first so it is the one measured.
const XOR: &str = "QUBITS 2\nCNOT q1 q0\nCNOT q0 q1\nCNOT q1 q0\nCNOT q0 q1\nMEASURE 1\n";

fn xor_program(b: bool, lambda: usize) -> Result<QcpProgram> {
    let f = compile_t_gadget(&GateCircuit::parse(XOR)?)?.circuit;
    let layout = Scheme2Layout { n_a: 1, n_b: 1, m_a: 1, k: 0, lambda };
    QcpProgram::new(layout, f, DensityMatrix::basis(&[b]))
}

pub(super) fn qcp_loop() -> Result<Finding> {
    const SAMPLES: usize = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC48);
    let b = true;
    let program = xor_program(b, 3)?;
    let bits = [false, true, true, false, true];
    let queries: Vec<_> = bits.iter().map(|&x| DensityMatrix::basis(&[x])).collect();
    let run = qcp_run(&program, &queries, &AdversarySpec::honest(), Mode::Exact, &mut rng)?;
    let mut worst: f64 = 0.0;
    for ((y, q), &x) in run.outputs.iter().zip(&queries).zip(&bits) {
        worst = worst.max(trace_distance(y, &program.reference(q)?)?);
        worst = worst.max(trace_distance(y, &DensityMatrix::basis(&[x ^ b]))?);
    }
    // Sampled runs: Pr[y = 1] per query against the deterministic table, 3σ = 0 here.
    let mut sampled_err: f64 = 0.0;
    for r in 0..SAMPLES {
        let run = qcp_run(&program, &queries, &AdversarySpec::honest(), Mode::Sampled, &mut repetition_rng(0xC48, r as u64))?;
        for (y, &x) in run.outputs.iter().zip(&bits) {
            sampled_err = sampled_err.max((y.matrix()[(1, 1)].re - f64::from(u8::from(x ^ b))).abs());
        }
    }
    let mut learned = true;
    for secret in [false, true] {
        let table = qcp_learn(&xor_program(secret, 1)?, &mut rng)?;
        learned &= table.len() == 2
            && (table[&false] - f64::from(u8::from(secret))).abs() < 1e-9
            && (table[&true] - f64::from(u8::from(!secret))).abs() < 1e-9;
    }
    Ok(Finding::new(
        run.outputs.len() == 5 && worst <= 1e-9 && sampled_err <= 1e-9 && learned,
        format!(
            "5 queries, exact max distance {worst:.1e}; {SAMPLES} sampled loops max error {sampled_err:.1e}; \
             2-query tabulation {}",
            if learned { "ok" } else { "wrong" }
        ),
    ))
}

pub(super) fn clifford_sampler() -> Result<Finding> {
    const N: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC49);
    let group = enumerate_cliffords(1)?;
    let index: HashMap<_, _> = group.iter().enumerate().map(|(i, c)| (c.key(), i)).collect();
    let mut counts = vec![0usize; group.len()];
    for _ in 0..N {
        counts[index[&random_clifford(1, &mut rng).key()]] += 1;
    }
    let p = 1.0 / group.len() as f64;
    let mean = N as f64 * p;
    let sigma = (N as f64 * p * (1.0 - p)).sqrt();
    let worst_z = counts.iter().map(|&c| (c as f64 - mean).abs() / sigma).fold(0.0, f64::max);

    // Dense U P U† against the tableau image, for every single-qubit X and Z.
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = 1 + i % 3;
        let c = random_clifford(n, &mut rng);
        for q in 0..n {
            for kind in ['X', 'Z'] {
                let p = PauliOp::single(n, q, kind);
                let dense = p.matrix().conjugate_by(c.unitary());
                worst = worst.max(dense.max_abs_diff(&c.conjugate_pauli(&p).matrix()));
            }
        }
    }
    Ok(Finding::new(
        group.len() == 24 && worst_z <= 5.0 && worst <= 1e-10,
        format!("24-element frequencies max {worst_z:.2}σ at N=1e4; tableau vs dense {worst:.1e} on 100 Cliffords"),
    ))
}

/// Every scenario kind run twice from one seed must yield the same report and log bytes.
pub(super) fn determinism() -> Result<Finding> {
    let configs = determinism_configs()?;
    let mut differing = Vec::new();
    for loaded in &configs {
        let a = run_scenario(loaded)?;
        let b = run_scenario(loaded)?;
        if a.report.to_json() != b.report.to_json() || a.transcript_log() != b.transcript_log() {
            differing.push(loaded.config.scenario.name());
        }
    }
    Ok(Finding::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} scenarios byte-identical on re-run", configs.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    ))
}

fn name(s: &str) -> Option<StateLiteral> {
    Some(StateLiteral::Name(s.into()))
}

fn determinism_configs() -> Result<Vec<LoadedScenario>> {
    let mut out = Vec::new();
    let mut choi = ScenarioConfig::new(ScenarioKind::ChoiDemo, 21);
    choi.channel = Some(ChannelConfig::Depolarizing(0.3));
    out.push(LoadedScenario::from_config(choi, ".".as_ref())?);

    let mut exp = ScenarioConfig::new(ScenarioKind::Experiment, 7);
    exp.shots = Some(1024);
    out.push(LoadedScenario::from_config(exp, ".".as_ref())?);

    let mut s1 = ScenarioConfig::new(ScenarioKind::Scheme1, 22);
    s1.channel = Some(ChannelConfig::Random { in_qubits: 2, out_qubits: 2, kraus: 2 });
    s1.inputs.alice = name("+");
    s1.inputs.bob = name("1");
    s1.split = Some(1);
    out.push(LoadedScenario::from_config(s1, ".".as_ref())?);

    let bell = "QUBITS 2\nH q0\nCNOT q0 q1\nMEASURE 1\n";
    let mut s2 = ScenarioConfig::new(ScenarioKind::Scheme2, 23);
    s2.lambda = 3;
    s2.inputs.alice = name("+");
    s2.inputs.bob = name("0");
    out.push(LoadedScenario::with_circuit_text(s2.clone(), bell)?);
    s2.method = Some(Mode::Sampled);
    s2.repetitions = Some(50);
    out.push(LoadedScenario::with_circuit_text(s2, bell)?);

    let mut reuse = ScenarioConfig::new(ScenarioKind::Reusable, 24);
    reuse.lambda = 1;
    reuse.alice_outputs = Some(1);
    reuse.inputs.bob = name("1");
    reuse.inputs.queries = vec![StateLiteral::Name("0".into()), StateLiteral::Name("+".into())];
    out.push(LoadedScenario::with_circuit_text(reuse, "QUBITS 2\nCNOT q1 q0\n")?);

    let mut hyb = ScenarioConfig::new(ScenarioKind::Hybrids, 25);
    hyb.lambda = 3;
    hyb.inputs.alice = name("+i");
    hyb.adversary = AdversaryConfig {
        corrupt: Some(crate::harness::Role::Bob),
        ..AdversaryConfig::default()
    };
    out.push(LoadedScenario::with_circuit_text(hyb, "QUBITS 1\nS q0\nH q0\n")?);

    let mut qcp = ScenarioConfig::new(ScenarioKind::Qcp, 26);
    qcp.lambda = 2;
    qcp.inputs.bob = name("1");
    qcp.inputs.queries = ["0", "1", "1"].iter().map(|s| StateLiteral::Name(s.to_string())).collect();
    out.push(LoadedScenario::with_circuit_text(qcp, XOR)?);
    Ok(out)
}
