use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::adversary::{AdversarySpec, Behavior};
use super::scheme2::{AliceMachine, BobMachine, DealerMachine, BOB_OUTCOMES};
use super::world::{Mode, Wire, World};
use crate::clifford::{branches_to_cq, cm_eval_exact, random_clifford, t_state, CliffordOp, CmCircuit};
use crate::error::{Error, Result};
use crate::harness::{audit_privacy, run_network, PartyMachine, Role, Transcript};
use crate::idealfunc::{Protocol1Output, Scheme2Layout};
use crate::qmat::DensityMatrix;

/// Private inputs of one Scheme 2 execution.
#[derive(Clone, Debug)]
pub struct Scheme2Instance {
    pub layout: Scheme2Layout,
    pub q: CmCircuit,
    pub x_a: DensityMatrix,
    pub x_b: DensityMatrix,
}

impl Scheme2Instance {
    /// `(x_A, x_B, T^k, 0^k)`, the input `Q` is specified on.
    pub fn circuit_input(&self, x_a: &DensityMatrix) -> DensityMatrix {
        let mut parts = vec![x_a.clone(), self.x_b.clone()];
        parts.extend((0..self.layout.k).map(|_| t_state()));
        parts.push(DensityMatrix::zeros(self.layout.k));
        DensityMatrix::tensor_all(parts.iter())
    }

    /// `Σ_o p_o |o⟩⟨o| ⊗ (y_A, y_B)_o` from evaluating `Q` directly.
    pub fn reference_cq(&self, x_a: &DensityMatrix) -> Result<DensityMatrix> {
        let branches = cm_eval_exact(&self.q, &self.circuit_input(x_a))?;
        branches_to_cq(&branches, self.q.shape().total_measured(), self.q.outputs())
    }
}

/// Keys to use instead of fresh samples, for exact averaging over one key.
#[derive(Clone, Debug, Default)]
pub struct Scheme2Keys {
    pub c_b_in: Option<CliffordOp>,
    pub c_a_in: Option<CliffordOp>,
    pub c_a_out: Option<CliffordOp>,
}

pub struct Scheme2Outcome {
    pub transcript: Transcript,
    pub world: World,
    pub alice_output: Option<Vec<Wire>>,
    pub bob_output: Vec<Wire>,
    pub accept_probability: f64,
    pub dealer: Option<Protocol1Output>,
    pub leaks: Vec<String>,
    pub outcome_bits: usize,
}

impl Scheme2Outcome {
    pub fn aborted(&self) -> bool {
        self.transcript.aborted()
    }

    pub fn y_a(&self) -> Result<Option<DensityMatrix>> {
        self.alice_output.as_ref().map(|w| self.world.reduced(w)).transpose()
    }

    pub fn y_b(&self) -> Result<DensityMatrix> {
        self.world.reduced(&self.bob_output)
    }

    /// Bob's decoded outcomes with the joint output `(y_A, y_B)`.
    pub fn joint_cq(&self) -> Result<DensityMatrix> {
        let a = self
            .alice_output
            .as_ref()
            .ok_or_else(|| Error::Protocol("run aborted before Alice's output".into()))?;
        let mut wires = a.clone();
        wires.extend(&self.bob_output);
        self.world.cq_state(BOB_OUTCOMES, self.outcome_bits, &wires)
    }
}

fn check_bob_output(inst: &Scheme2Instance, adversary: &AdversarySpec) -> Result<()> {
    if adversary.controls(Role::Bob)
        && adversary.behavior == Behavior::Malicious
        && inst.layout.bob_outputs(&inst.q) > 0
    {
        return Err(Error::Protocol("a malicious Bob requires a circuit without Bob output".into()));
    }
    Ok(())
}

/// One full three-round execution of Scheme 2.
pub fn scheme2_run<R: Rng + ?Sized>(
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    mode: Mode,
    rng: &mut R,
) -> Result<Scheme2Outcome> {
    scheme2_run_with_keys(inst, adversary, mode, &Scheme2Keys::default(), rng)
}

pub fn scheme2_run_with_keys<R: Rng + ?Sized>(
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    mode: Mode,
    keys: &Scheme2Keys,
    rng: &mut R,
) -> Result<Scheme2Outcome> {
    check_bob_output(inst, adversary)?;
    inst.layout.check_circuit(&inst.q)?;
    let session: u64 = rng.gen();
    let mut world = World::new(mode);
    let mut alice = AliceMachine::new(inst.layout, adversary.input_for(Role::Alice, &inst.x_a));
    alice.c_a_in = keys.c_a_in.clone();
    alice.c_a_out = keys.c_a_out.clone();
    let mut bob = BobMachine::new(inst.layout, inst.q.clone(), adversary.input_for(Role::Bob, &inst.x_b), session);
    bob.c_b_in = keys.c_b_in.clone();
    let mut dealer = DealerMachine::new(session);
    let transcript = run_network(&mut [&mut bob, &mut alice, &mut dealer], &mut world, adversary, rng)?;
    let leaks = audit_privacy(&transcript, &[&alice as &dyn PartyMachine, &bob, &dealer]);
    Ok(Scheme2Outcome {
        transcript,
        world,
        alice_output: alice.output,
        bob_output: bob.output.unwrap_or_default(),
        accept_probability: alice.accept_probability,
        dealer: dealer.result,
        leaks,
        outcome_bits: inst.q.shape().total_measured(),
    })
}

/// Bob's round-1 registers sent ahead of time under one `C_{B,in}`.
pub struct ReusableSession {
    inst: Scheme2Instance,
    c_b_in: CliffordOp,
    world: World,
    registers: Vec<Vec<Wire>>,
    runs: usize,
}

/// Per-run result of a reusable session.
pub struct ReusableRun {
    pub transcript: Transcript,
    pub y_a: Option<DensityMatrix>,
    pub joint_cq: Option<DensityMatrix>,
    pub accept_probability: f64,
}

impl ReusableSession {
    pub fn new<R: Rng + ?Sized>(inst: Scheme2Instance, registers: usize, mode: Mode, rng: &mut R) -> Result<Self> {
        inst.layout.check_circuit(&inst.q)?;
        let c_b_in = random_clifford(inst.layout.m_b1_width(), rng);
        let bob = BobMachine::new(inst.layout, inst.q.clone(), inst.x_b.clone(), 0);
        let mut world = World::new(mode);
        let regs = (0..registers)
            .map(|_| bob.encode_round1(&mut world, &c_b_in))
            .collect::<Result<_>>()?;
        Ok(Self {
            inst,
            c_b_in,
            world,
            registers: regs,
            runs: 0,
        })
    }

    pub fn remaining(&self) -> usize {
        self.registers.len()
    }

    /// A two-round execution on the next pre-sent register.
    pub fn run<R: Rng + ?Sized>(&mut self, x_a: &DensityMatrix, adversary: &AdversarySpec, rng: &mut R) -> Result<ReusableRun> {
        check_bob_output(&self.inst, adversary)?;
        if self.registers.is_empty() {
            return Err(Error::RegistersExhausted(self.runs));
        }
        let reg = self.registers.remove(0);
        let session: u64 = rng.gen();
        let mut alice = AliceMachine::new(self.inst.layout, adversary.input_for(Role::Alice, x_a)).with_pre_received(reg.clone());
        let mut bob = BobMachine::new(
            self.inst.layout,
            self.inst.q.clone(),
            adversary.input_for(Role::Bob, &self.inst.x_b),
            session,
        )
        .with_pre_sent(self.c_b_in.clone());
        let mut dealer = DealerMachine::new(session);
        let transcript = run_network(&mut [&mut bob, &mut alice, &mut dealer], &mut self.world, adversary, rng)?;
        self.runs += 1;
        let bits = self.inst.q.shape().total_measured();
        let (y_a, joint_cq) = match &alice.output {
            Some(w) => {
                let mut all = w.clone();
                all.extend(bob.output.clone().unwrap_or_default());
                (Some(self.world.reduced(w)?), Some(self.world.cq_state(BOB_OUTCOMES, bits, &all)?))
            }
            None => (None, None),
        };
        self.compact()?;
        Ok(ReusableRun {
            transcript,
            y_a,
            joint_cq,
            accept_probability: alice.accept_probability,
        })
    }

    /// Rebuilds the world from the unused registers alone.
    fn compact(&mut self) -> Result<()> {
        let keep: Vec<Wire> = self.registers.iter().flatten().copied().collect();
        let joint = self.world.reduced(&keep)?;
        let mut fresh = World::new(self.world.mode());
        let mut wires = fresh.alloc(&joint)?.into_iter();
        for w in self.registers.iter_mut().flatten() {
            *w = wires.next().expect("same width");
        }
        self.world = fresh;
        Ok(())
    }
}

/// One execution of a reusable session per Alice input.
pub fn scheme2_reusable<R: Rng + ?Sized>(
    session: &mut ReusableSession,
    inputs: &[DensityMatrix],
    adversary: &AdversarySpec,
    rng: &mut R,
) -> Result<Vec<ReusableRun>> {
    inputs.iter().map(|x| session.run(x, adversary, rng)).collect()
}

/// Sub-stream for repetition `i`, so repetitions are independent of order.
pub fn repetition_rng(seed: u64, i: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{compile_t_gadget, CmLayer, GateCircuit, PauliOp, Selector};
    use crate::harness::Role;
    use crate::protocol::Tamper;
    use crate::qmat::trace_distance;
    use rand::SeedableRng;

    fn layout(n_a: usize, n_b: usize, m_a: usize, k: usize, lambda: usize) -> Scheme2Layout {
        Scheme2Layout { n_a, n_b, m_a, k, lambda }
    }

    #[test]
    fn identity_returns_alice_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x_a = DensityMatrix::named("+i").unwrap();
        let inst = Scheme2Instance {
            layout: layout(1, 0, 1, 0, 0),
            q: CmCircuit::identity(1),
            x_a: x_a.clone(),
            x_b: DensityMatrix::empty(),
        };
        let out = scheme2_run(&inst, &AdversarySpec::honest(), Mode::Exact, &mut rng).unwrap();
        assert!(!out.aborted());
        assert!(out.leaks.is_empty(), "{:?}", out.leaks);
        assert!(trace_distance(&out.y_a().unwrap().unwrap(), &x_a).unwrap() < 1e-9);
    }

    #[test]
    fn cnot_then_measure_matches_reference() {
        let q = CmCircuit::new(
            2,
            vec![
                CmLayer {
                    selector: Selector::Fixed(
                        CliffordOp::cnot(2, 0, 1).unwrap().then(&CliffordOp::permutation(&[1, 0]).unwrap()).unwrap(),
                    ),
                    measured: 1,
                },
            ],
        )
        .unwrap();
        for lambda in [0, 3] {
            let mut rng = ChaCha8Rng::seed_from_u64(2 + lambda as u64);
            let inst = Scheme2Instance {
                layout: layout(1, 1, 1, 0, lambda),
                q: q.clone(),
                x_a: DensityMatrix::named("+").unwrap(),
                x_b: DensityMatrix::zeros(1),
            };
            let out = scheme2_run(&inst, &AdversarySpec::honest(), Mode::Exact, &mut rng).unwrap();
            let reference = inst.reference_cq(&inst.x_a).unwrap();
            assert!(trace_distance(&out.joint_cq().unwrap(), &reference).unwrap() < 1e-9);
            assert!((out.accept_probability - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn t_gate_matches_dense_unitary() {
        let gates = GateCircuit::parse("QUBITS 1\nH 0\nT 0\n").unwrap();
        let compiled = compile_t_gadget(&gates).unwrap();
        let q = compiled.circuit.with_idle_wires(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x_a = DensityMatrix::named("1").unwrap();
        let inst = Scheme2Instance {
            layout: layout(1, 0, 1, 1, 2),
            q,
            x_a: x_a.clone(),
            x_b: DensityMatrix::empty(),
        };
        let out = scheme2_run(&inst, &AdversarySpec::honest(), Mode::Exact, &mut rng).unwrap();
        let direct = gates.direct_eval(&x_a).unwrap();
        assert!(trace_distance(&out.y_a().unwrap().unwrap(), &direct).unwrap() < 1e-9);
    }

    #[test]
    fn tampered_trap_lowers_acceptance() {
        let inst = Scheme2Instance {
            layout: layout(1, 0, 1, 0, 2),
            q: CmCircuit::identity(1),
            x_a: DensityMatrix::zeros(1),
            x_b: DensityMatrix::empty(),
        };
        let adv = AdversarySpec::malicious(Role::Bob).with_tamper(Tamper {
            label: super::super::scheme2::M_B2.into(),
            pauli: Some(PauliOp::single(3, 2, 'X')),
            classical_xor: Vec::new(),
        });
        let runs = 40;
        let mut accepted = 0.0;
        for seed in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = scheme2_run(&inst, &adv, Mode::Exact, &mut rng).unwrap();
            accepted += out.accept_probability;
        }
        assert!(accepted / (runs as f64) < 0.45, "{accepted}");
    }

    #[test]
    fn reusable_registers_run_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inst = Scheme2Instance {
            layout: layout(1, 1, 1, 0, 1),
            q: CmCircuit::single(CliffordOp::cnot(2, 1, 0).unwrap(), 0).unwrap(),
            x_a: DensityMatrix::zeros(1),
            x_b: DensityMatrix::named("1").unwrap(),
        };
        let mut session = ReusableSession::new(inst, 3, Mode::Exact, &mut rng).unwrap();
        let inputs = vec![DensityMatrix::zeros(1), DensityMatrix::named("1").unwrap(), DensityMatrix::zeros(1)];
        let runs = scheme2_reusable(&mut session, &inputs, &AdversarySpec::honest(), &mut rng).unwrap();
        assert_eq!(runs.len(), 3);
        let one = DensityMatrix::named("1").unwrap();
        assert!(trace_distance(runs[0].y_a.as_ref().unwrap(), &one).unwrap() < 1e-9);
        assert!(trace_distance(runs[1].y_a.as_ref().unwrap(), &DensityMatrix::zeros(1)).unwrap() < 1e-9);
        let err = session.run(&DensityMatrix::zeros(1), &AdversarySpec::honest(), &mut rng).err().unwrap();
        assert_eq!(err, Error::RegistersExhausted(3));
    }
}
