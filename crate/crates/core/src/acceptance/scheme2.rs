use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Finding;
use crate::channels::KrausChannel;
use crate::clifford::{compile_t_gadget, enumerate_cliffords, random_clifford, CliffordOp, CmCircuit, Gate, GateCircuit};
use crate::error::{Error, Result};
use crate::harness::{compare_views, Role};
use crate::idealfunc::{ChannelSpec, Scheme2Layout};
use crate::protocol::{
    hybrid_replay, scheme1_replay, scheme2_run, scheme2_run_with_keys, AdversarySpec, Averaging, HybridLevel, Mode,
    Scheme1Instance, Scheme2Instance, Scheme2Keys, SchemeId, M_A, M_B1,
};
use crate::qmat::random::random_pure;
use crate::qmat::{trace_distance, DensityMatrix};

fn random_clifford_gate<R: Rng>(live: &[usize], rng: &mut R) -> Gate {
    let q = live[rng.gen_range(0..live.len())];
    match rng.gen_range(0..if live.len() > 1 { 5 } else { 4 }) {
        0 => Gate::H(q),
        1 => Gate::S(q),
        2 => Gate::X(q),
        3 => Gate::Z(q),
        _ => {
            let mut t = live[rng.gen_range(0..live.len())];
            while t == q {
                t = live[rng.gen_range(0..live.len())];
            }
            Gate::Cnot(q, t)
        }
    }
}

/// At most two C+M layers: plain, one T gadget, or one mid-circuit `MEASURE`.
fn random_gate_circuit<R: Rng>(kind: usize, rng: &mut R) -> Result<GateCircuit> {
    let n = rng.gen_range(1..=3);
    let all: Vec<usize> = (0..n).collect();
    let mut gates: Vec<Gate> = (0..rng.gen_range(2..=5)).map(|_| random_clifford_gate(&all, rng)).collect();
    match kind {
        1 => {
            let at = rng.gen_range(0..=gates.len());
            gates.insert(at, Gate::T(rng.gen_range(0..n)));
        }
        2 if n > 1 => {
            let k = rng.gen_range(1..n);
            gates.push(Gate::Measure(k));
            let rest: Vec<usize> = (k..n).collect();
            gates.extend((0..rng.gen_range(1..=3)).map(|_| random_clifford_gate(&rest, rng)));
        }
        _ => {}
    }
    GateCircuit::new(n, gates)
}

/// 20 random instances: honest runs against `cm_eval_exact`, and measurement-free
/// ones also against the circuit's dense unitary applied gate by gate.
pub(super) fn correctness() -> Result<Finding> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC44);
    let mut worst_cm: f64 = 0.0;
    let mut worst_dense: f64 = 0.0;
    let mut dense_checked = 0;
    for i in 0..20 {
        let gates = random_gate_circuit(i % 3, &mut rng)?;
        let compiled = compile_t_gadget(&gates)?;
        let t = compiled.t_count;
        let q = compiled.circuit.with_idle_wires(t)?;
        let n = gates.qubits();
        let n_a = rng.gen_range(1..=n);
        let x_a = random_pure(n_a, &mut rng);
        let x_b = if n > n_a { random_pure(n - n_a, &mut rng) } else { DensityMatrix::empty() };
        let layout = Scheme2Layout {
            n_a,
            n_b: n - n_a,
            m_a: q.outputs() - t,
            k: t,
            lambda: if i % 2 == 0 { 0 } else { 3 },
        };
        let inst = Scheme2Instance { layout, q, x_a, x_b };
        let out = scheme2_run(&inst, &AdversarySpec::honest(), Mode::Exact, &mut rng)?;
        if out.aborted() {
            return Ok(Finding::new(false, format!("instance {i} aborted")));
        }
        worst_cm = worst_cm.max(trace_distance(&out.joint_cq()?, &inst.reference_cq(&inst.x_a)?)?);
        if !gates.has_measurements() {
            let y = out.y_a()?.ok_or_else(|| Error::Protocol("no output".into()))?;
            let direct = gates.direct_eval(&inst.x_a.tensor(&inst.x_b))?;
            worst_dense = worst_dense.max(trace_distance(&y, &direct)?);
            dense_checked += 1;
        }
    }
    let worst = worst_cm.max(worst_dense);
    Ok(Finding::new(
        worst <= 1e-9,
        format!("20 circuits, vs cm_eval_exact {worst_cm:.2e}, vs dense unitary {worst_dense:.2e} on {dense_checked} (tol 1e-9)"),
    ))
}

fn register_average(
    inst: &Scheme2Instance,
    label: &str,
    group: &[CliffordOp],
    keys: impl Fn(&CliffordOp) -> Scheme2Keys,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let w = 1.0 / group.len() as f64;
    let mut parts = Vec::with_capacity(group.len());
    for c in group {
        let out = scheme2_run_with_keys(inst, &AdversarySpec::honest(), Mode::Exact, &keys(c), rng)?;
        let rho = out
            .transcript
            .find(label)
            .and_then(|e| e.quantum.clone())
            .ok_or_else(|| Error::Protocol(format!("no quantum payload on {label}")))?;
        parts.push((w, rho));
    }
    let avg = DensityMatrix::mixture(&parts)?;
    trace_distance(&avg, &DensityMatrix::maximally_mixed(avg.qubits()))
}

/// Exact averages over every key in the Clifford group of the register width.
pub(super) fn otp_privacy() -> Result<Finding> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC45);
    let g1 = enumerate_cliffords(1)?;
    let g2 = enumerate_cliffords(2)?;
    let inst = |n_a: usize, n_b: usize, lambda: usize, rng: &mut ChaCha8Rng| -> Result<Scheme2Instance> {
        let n = n_a + n_b;
        Ok(Scheme2Instance {
            layout: Scheme2Layout { n_a, n_b, m_a: n_a, k: 0, lambda },
            q: CmCircuit::single(random_clifford(n, rng), 0)?,
            x_a: random_pure(n_a, rng),
            x_b: if n_b > 0 { random_pure(n_b, rng) } else { DensityMatrix::empty() },
        })
    };
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    // Alice → Bob: m_A under C_{A,in}, widths 1 and 2.
    for (n_a, n_b, group) in [(1, 0, &g1), (1, 1, &g2)] {
        let i = inst(n_a, n_b, 0, &mut rng)?;
        let c_b_in = random_clifford(i.layout.m_b1_width(), &mut rng);
        let d = register_average(
            &i,
            M_A,
            group,
            |c| Scheme2Keys {
                c_b_in: Some(c_b_in.clone()),
                c_a_in: Some(c.clone()),
                c_a_out: None,
            },
            &mut rng,
        )?;
        parts.push(format!("m_A w={} {d:.1e}", i.layout.m_a_width()));
        worst = worst.max(d);
    }
    // Bob → Alice: m_B1 under C_{B,in}, widths 1 and 2.
    for (n_b, lambda, group) in [(1, 0, &g1), (1, 1, &g2)] {
        let i = inst(1, n_b, lambda, &mut rng)?;
        let d = register_average(
            &i,
            M_B1,
            group,
            |c| Scheme2Keys {
                c_b_in: Some(c.clone()),
                ..Scheme2Keys::default()
            },
            &mut rng,
        )?;
        parts.push(format!("m_B1 w={} {d:.1e}", i.layout.m_b1_width()));
        worst = worst.max(d);
    }
    Ok(Finding::new(worst <= 1e-9, format!("trace distance to I/2^w: {} (tol 1e-9)", parts.join(", "))))
}

fn alice_side(lambda: usize) -> Result<Scheme2Instance> {
    Ok(Scheme2Instance {
        layout: Scheme2Layout { n_a: 1, n_b: 1, m_a: 1, k: 0, lambda },
        q: CmCircuit::single(CliffordOp::cnot(2, 1, 0)?, 0)?,
        x_a: DensityMatrix::named("+")?,
        x_b: DensityMatrix::named("1")?,
    })
}

fn bob_side(lambda: usize) -> Result<Scheme2Instance> {
    Ok(Scheme2Instance {
        layout: Scheme2Layout { n_a: 1, n_b: 0, m_a: 1, k: 0, lambda },
        q: CmCircuit::single(CliffordOp::h(1, 0).compose(&CliffordOp::s(1, 0))?, 0)?,
        x_a: DensityMatrix::bloch(0.7, 0.2)?,
        x_b: DensityMatrix::empty(),
    })
}

/// Steps H1≈H2 and H3≈H4 must vanish; H0≈H1 (the dealer-backed 2PC) is
/// reported and also expected to vanish. Endpoint H0 vs simulator under
/// exact averaging, and at 10⁴ Monte Carlo samples for λ = 0.
pub(super) fn hybrid_ladders() -> Result<Finding> {
    const MC: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC46);
    let levels = HybridLevel::ladder(SchemeId::Scheme2);
    let mut step_worst: f64 = 0.0;
    let mut twopc_worst: f64 = 0.0;
    let mut other_worst: f64 = 0.0;
    let mut end_worst: f64 = 0.0;
    for lambda in [0, 3] {
        let cases = [
            (Role::Alice, alice_side(lambda)?, AdversarySpec::semi_honest(Role::Alice)),
            (
                Role::Alice,
                alice_side(lambda)?,
                AdversarySpec::malicious(Role::Alice).with_substitute(DensityMatrix::named("-i")?),
            ),
            (Role::Bob, bob_side(lambda)?, AdversarySpec::semi_honest(Role::Bob)),
        ];
        for (side, inst, adv) in &cases {
            let views = levels
                .iter()
                .map(|&l| hybrid_replay(l, *side, inst, adv, Averaging::Exact, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..4 {
                let d = compare_views("step", &views[i], &views[i + 1])?.max;
                match i {
                    0 => twopc_worst = twopc_worst.max(d),
                    1 | 3 => step_worst = step_worst.max(d),
                    _ => other_worst = other_worst.max(d),
                }
            }
            end_worst = end_worst.max(compare_views("end", &views[0], &views[4])?.max);
        }
    }
    let mut mc_worst: f64 = 0.0;
    for (side, inst) in [(Role::Bob, bob_side(0)?), (Role::Alice, alice_side(0)?)] {
        let adv = AdversarySpec::semi_honest(side);
        let real = hybrid_replay(levels[0], side, &inst, &adv, Averaging::MonteCarlo(MC), &mut rng)?;
        let sim = hybrid_replay(levels[4], side, &inst, &adv, Averaging::MonteCarlo(MC), &mut rng)?;
        mc_worst = mc_worst.max(compare_views("mc", &real, &sim)?.max);
    }
    let s1 = Scheme1Instance {
        channel: ChannelSpec::Kraus(KrausChannel::random(2, 2, 2, &mut rng)),
        rho_a: DensityMatrix::named("+")?,
        rho_b: DensityMatrix::named("0")?,
        split: 1,
    };
    let s1_adv = AdversarySpec::malicious(Role::Bob).with_substitute(DensityMatrix::named("-")?);
    let s1_views = HybridLevel::ladder(SchemeId::Scheme1)
        .into_iter()
        .map(|l| scheme1_replay(l, &s1, &s1_adv, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let s1_d = compare_views("s1", &s1_views[0], &s1_views[1])?.max;
    let passed = step_worst <= 1e-6 && twopc_worst <= 1e-6 && end_worst <= 0.03 && mc_worst <= 0.03 && s1_d <= 1e-6;
    Ok(Finding::new(
        passed,
        format!(
            "H1-H2/H3-H4 {step_worst:.1e}, 2PC step {twopc_worst:.1e}, H2-H3 {other_worst:.1e}, \
             H0-sim exact {end_worst:.1e}, H0-sim MC(1e4) {mc_worst:.3}, scheme1 {s1_d:.1e}"
        ),
    ))
}
