use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adversary::AdversarySpec;
use super::runs::{scheme2_run_with_keys, Scheme2Instance, Scheme2Keys};
use super::scheme2::{
    eval_cm_on_world, eval_garbled_on_world, verify_output, ALICE_TRAPS, BOB_OUTCOMES, BOB_RAW, M_A, M_B1, M_B2,
};
use super::world::{Branch, Mode, Wire, World};
use crate::clifford::{random_clifford, t_state, CliffordOp};
use crate::error::{Error, Result};
use crate::garble::{qgsim_keyed, GarbledCircuit};
use crate::harness::Role;
use crate::idealfunc::{build_q_b, classical_2pc_protocol1, u_dec, AliceTwoPcInput, BobTwoPcInput, Scheme2Layout};
use crate::qmat::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    Scheme1,
    Scheme2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridLevel {
    pub scheme: SchemeId,
    pub index: u8,
}

impl HybridLevel {
    /// Index of the simulated execution.
    pub fn top(scheme: SchemeId) -> u8 {
        match scheme {
            SchemeId::Scheme1 => 1,
            SchemeId::Scheme2 => 4,
        }
    }

    pub fn new(scheme: SchemeId, index: u8) -> Result<Self> {
        if index > Self::top(scheme) {
            return Err(Error::Protocol(format!("{scheme:?} has no hybrid {index}")));
        }
        Ok(Self { scheme, index })
    }

    pub fn ladder(scheme: SchemeId) -> Vec<Self> {
        (0..=Self::top(scheme)).map(|index| Self { scheme, index }).collect()
    }
}

/// Largest instance replayed: data qubits and traps.
pub const HYBRID_MAX_DATA: usize = 3;
pub const HYBRID_MAX_LAMBDA: usize = 3;

/// One Scheme 2 execution at some hybrid level, with the registers as delivered.
pub struct HybridRun {
    pub world: World,
    pub m_b1: DensityMatrix,
    pub m_a: DensityMatrix,
    pub m_b2: DensityMatrix,
    pub c_a_out: CliffordOp,
    pub alice_output: Option<Vec<Wire>>,
    pub bob_output: Vec<Wire>,
    pub accept_probability: f64,
    pub outcome_bits: usize,
}

fn check_size(inst: &Scheme2Instance) -> Result<()> {
    let l = inst.layout;
    if l.n_a + l.n_b > HYBRID_MAX_DATA || l.lambda > HYBRID_MAX_LAMBDA {
        return Err(Error::InstanceTooLarge(format!(
            "hybrids replay at most {HYBRID_MAX_DATA} data qubits and λ ≤ {HYBRID_MAX_LAMBDA}"
        )));
    }
    Ok(())
}

struct Keys {
    c_b_in: CliffordOp,
    c_a_in: CliffordOp,
    c_a_out: CliffordOp,
}

fn fill_keys<R: Rng + ?Sized>(l: &Scheme2Layout, keys: &Scheme2Keys, rng: &mut R) -> Keys {
    let mut draw = |k: &Option<CliffordOp>, n: usize| k.clone().unwrap_or_else(|| random_clifford(n, rng));
    Keys {
        c_b_in: draw(&keys.c_b_in, l.m_b1_width()),
        c_a_in: draw(&keys.c_a_in, l.m_a_width()),
        c_a_out: draw(&keys.c_a_out, l.out_width()),
    }
}

fn tamper(world: &mut World, adversary: &AdversarySpec, sender: Role, label: &str, wires: &[Wire]) -> Result<()> {
    if let Some(p) = adversary.tamper_for(sender, label).and_then(|t| t.pauli.as_ref()) {
        world.apply_pauli(wires, p)?;
    }
    Ok(())
}

fn alloc_b1(world: &mut World, x_b: &DensityMatrix, l: &Scheme2Layout, c: &CliffordOp) -> Result<Vec<Wire>> {
    let mut wires = world.alloc(x_b)?;
    wires.extend(world.alloc(&DensityMatrix::zeros(l.lambda))?);
    world.apply(&wires, c)?;
    Ok(wires)
}

/// `(x_A, rest, T^k, 0^k)` as fresh wires around `rest`.
fn assemble(world: &mut World, x_a: &DensityMatrix, rest: &[Wire], k: usize) -> Result<Vec<Wire>> {
    let mut wires = world.alloc(x_a)?;
    wires.extend_from_slice(rest);
    for _ in 0..k {
        wires.extend(world.alloc(&t_state())?);
    }
    wires.extend(world.alloc(&DensityMatrix::zeros(k))?);
    Ok(wires)
}

fn dealer_garble<R: Rng + ?Sized>(inst: &Scheme2Instance, keys: &Keys, rng: &mut R) -> Result<crate::idealfunc::Protocol1Output> {
    classical_2pc_protocol1(
        &AliceTwoPcInput {
            c_a_in: keys.c_a_in.clone(),
            c_a_out: keys.c_a_out.clone(),
        },
        &BobTwoPcInput {
            c_b_in: keys.c_b_in.clone(),
            q: inst.q.clone(),
            layout: inst.layout,
        },
        rng,
    )
}

/// Garbled evaluation by Bob; returns `(m_B2, y_B)`.
fn bob_evaluates<R: Rng + ?Sized>(
    world: &mut World,
    m_a: &[Wire],
    w: &CliffordOp,
    gc: &GarbledCircuit,
    l: &Scheme2Layout,
    rng: &mut R,
) -> Result<(Vec<Wire>, Vec<Wire>)> {
    world.apply(m_a, w)?;
    let out = eval_garbled_on_world(world, m_a, gc, BOB_RAW, BOB_OUTCOMES, rng)?;
    let (a, b) = out.split_at(l.out_width());
    Ok((a.to_vec(), b.to_vec()))
}

/// `C_{A,out}(y_A, 0^λ)` from the first `m_A` of `out`, plus the rest.
fn wrap_output(world: &mut World, out: &[Wire], l: &Scheme2Layout, c_a_out: &CliffordOp) -> Result<(Vec<Wire>, Vec<Wire>)> {
    let mut y = out[..l.m_a].to_vec();
    y.extend(world.alloc(&DensityMatrix::zeros(l.lambda))?);
    world.apply(&y, c_a_out)?;
    Ok((y, out[l.m_a..].to_vec()))
}

fn real_run<R: Rng + ?Sized>(
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    keys: Keys,
    mode: Mode,
    rng: &mut R,
) -> Result<HybridRun> {
    let injected = Scheme2Keys {
        c_b_in: Some(keys.c_b_in),
        c_a_in: Some(keys.c_a_in),
        c_a_out: Some(keys.c_a_out.clone()),
    };
    let out = scheme2_run_with_keys(inst, adversary, mode, &injected, rng)?;
    let payload = |label: &str| {
        out.transcript
            .find(label)
            .map(|e| e.quantum.clone().unwrap_or_else(DensityMatrix::empty))
            .ok_or_else(|| Error::Protocol(format!("real execution sent no {label}")))
    };
    Ok(HybridRun {
        m_b1: payload(M_B1)?,
        m_a: payload(M_A)?,
        m_b2: payload(M_B2)?,
        c_a_out: keys.c_a_out,
        alice_output: out.alice_output,
        bob_output: out.bob_output,
        accept_probability: out.accept_probability,
        outcome_bits: out.outcome_bits,
        world: out.world,
    })
}

/// Alice-side ladder: Alice is the party under attack by the simulator.
/// Level 0 is the networked protocol and level 4 is [`sim_alice`].
pub fn alice_hybrid<R: Rng + ?Sized>(
    index: u8,
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    keys: &Scheme2Keys,
    mode: Mode,
    rng: &mut R,
) -> Result<HybridRun> {
    check_size(inst)?;
    HybridLevel::new(SchemeId::Scheme2, index)?;
    let l = inst.layout;
    inst.layout.check_circuit(&inst.q)?;
    let keys = fill_keys(&l, keys, rng);
    if index == 0 {
        return real_run(inst, adversary, keys, mode, rng);
    }
    let x_a = adversary.input_for(Role::Alice, &inst.x_a);
    let mut world = World::new(mode);
    let bob_in = if index >= 3 { DensityMatrix::zeros(l.n_b) } else { inst.x_b.clone() };
    let b1 = alloc_b1(&mut world, &bob_in, &l, &keys.c_b_in)?;
    tamper(&mut world, adversary, Role::Bob, M_B1, &b1)?;
    let m_b1 = world.reduced(&b1)?;
    let a = assemble(&mut world, &x_a, &b1, l.k)?;
    world.apply(&a, &keys.c_a_in)?;
    tamper(&mut world, adversary, Role::Alice, M_A, &a)?;
    let m_a = world.reduced(&a)?;
    let (b2, y_b) = match index {
        1 => {
            let dealt = dealer_garble(inst, &keys, rng)?;
            bob_evaluates(&mut world, &a, &dealt.bob.w, &dealt.bob.garbled, &l, rng)?
        }
        2 => {
            world.apply(&a, &u_dec(&keys.c_a_in, &keys.c_b_in, &l)?)?;
            let q_b = build_q_b(&inst.q, &keys.c_a_out, &l)?;
            let out = eval_cm_on_world(&mut world, &a, &q_b, BOB_OUTCOMES, rng)?;
            let (x, y) = out.split_at(l.out_width());
            (x.to_vec(), y.to_vec())
        }
        _ => {
            world.apply(&a, &u_dec(&keys.c_a_in, &keys.c_b_in, &l)?)?;
            world.release(&a[l.n_a..])?;
            let x_a_prime = a[..l.n_a].to_vec();
            if index == 3 {
                let mut fresh = world.alloc(&inst.x_b)?;
                fresh.extend(world.alloc(&DensityMatrix::zeros(l.lambda))?);
                let wires = assemble_after(&mut world, &x_a_prime, &fresh, l.k)?;
                let q_b = build_q_b(&inst.q, &keys.c_a_out, &l)?;
                let out = eval_cm_on_world(&mut world, &wires, &q_b, BOB_OUTCOMES, rng)?;
                let (x, y) = out.split_at(l.out_width());
                (x.to_vec(), y.to_vec())
            } else {
                let y = ideal_eval(&mut world, &x_a_prime, inst, rng)?;
                wrap_output(&mut world, &y, &l, &keys.c_a_out)?
            }
        }
    };
    tamper(&mut world, adversary, Role::Bob, M_B2, &b2)?;
    let m_b2 = world.reduced(&b2)?;
    let (accept_probability, alice_output) = verify_output(&mut world, &b2, &keys.c_a_out, l, rng)?;
    Ok(HybridRun {
        world,
        m_b1,
        m_a,
        m_b2,
        c_a_out: keys.c_a_out,
        alice_output,
        bob_output: y_b,
        accept_probability,
        outcome_bits: inst.q.shape().total_measured(),
    })
}

/// `(x_A', fresh, T^k, 0^k)` reusing existing `x_A'` wires.
fn assemble_after(world: &mut World, x_a: &[Wire], fresh: &[Wire], k: usize) -> Result<Vec<Wire>> {
    let mut wires = x_a.to_vec();
    wires.extend_from_slice(fresh);
    for _ in 0..k {
        wires.extend(world.alloc(&t_state())?);
    }
    wires.extend(world.alloc(&DensityMatrix::zeros(k))?);
    Ok(wires)
}

/// `I[x_B, Q]`: evaluates `Q` on `(x_A', x_B, T^k, 0^k)` with a fresh copy of Bob's input.
fn ideal_eval<R: Rng + ?Sized>(world: &mut World, x_a: &[Wire], inst: &Scheme2Instance, rng: &mut R) -> Result<Vec<Wire>> {
    let fresh = world.alloc(&inst.x_b)?;
    let wires = assemble_after(world, x_a, &fresh, inst.layout.k)?;
    eval_cm_on_world(world, &wires, &inst.q, BOB_OUTCOMES, rng)
}

/// The simulator facing a malicious Alice.
pub fn sim_alice<R: Rng + ?Sized>(
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    keys: &Scheme2Keys,
    mode: Mode,
    rng: &mut R,
) -> Result<HybridRun> {
    alice_hybrid(HybridLevel::top(SchemeId::Scheme2), inst, adversary, keys, mode, rng)
}

/// Bob-side ladder: Bob is the party under attack. Level 4 is [`sim_bob`].
pub fn bob_hybrid<R: Rng + ?Sized>(
    index: u8,
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    keys: &Scheme2Keys,
    mode: Mode,
    rng: &mut R,
) -> Result<HybridRun> {
    check_size(inst)?;
    HybridLevel::new(SchemeId::Scheme2, index)?;
    let l = inst.layout;
    l.check_circuit(&inst.q)?;
    if l.bob_outputs(&inst.q) != 0 {
        return Err(Error::Protocol("the Bob-side ladder needs a circuit without Bob output".into()));
    }
    let keys = fill_keys(&l, keys, rng);
    if index == 0 {
        return real_run(inst, adversary, keys, mode, rng);
    }
    let x_b = adversary.input_for(Role::Bob, &inst.x_b);
    let mut world = World::new(mode);
    let b1 = alloc_b1(&mut world, &x_b, &l, &keys.c_b_in)?;
    tamper(&mut world, adversary, Role::Bob, M_B1, &b1)?;
    let m_b1 = world.reduced(&b1)?;
    let dealt = dealer_garble(inst, &keys, rng)?;
    let (a, w, gc, ideal) = if index == 1 {
        let a = assemble(&mut world, &inst.x_a, &b1, l.k)?;
        world.apply(&a, &keys.c_a_in)?;
        (a, dealt.bob.w.clone(), dealt.bob.garbled.clone(), None)
    } else {
        world.apply(&b1, &keys.c_b_in.inverse())?;
        let v = random_clifford(l.m_a_width(), rng);
        let wires = assemble(&mut world, &inst.x_a, &b1, l.k)?;
        match index {
            2 => {
                world.apply(&wires, &dealt.e0.e0)?;
                world.apply(&wires, &v.inverse())?;
                (wires, v, dealt.bob.garbled.clone(), None)
            }
            _ => {
                let (y_hat, ideal) = if index == 3 {
                    let out = eval_cm_on_world(&mut world, &wires, &dealt.q_b, BOB_OUTCOMES, rng)?;
                    (out, None)
                } else {
                    world.release(&wires[l.n_a + l.n_b..l.n_a + l.m_b1_width()])?;
                    let mut kept = wires[..l.n_a + l.n_b].to_vec();
                    kept.extend_from_slice(&wires[l.n_a + l.m_b1_width()..]);
                    let y = eval_cm_on_world(&mut world, &kept, &inst.q, BOB_OUTCOMES, rng)?;
                    let fake = world.alloc(&DensityMatrix::zeros(l.out_width()))?;
                    world.apply(&fake, &keys.c_a_out)?;
                    (fake, Some(y))
                };
                let (key, sim) = qgsim_keyed(dealt.q_b.shape(), 0, rng);
                let mut inp = world.alloc(&DensityMatrix::zeros(dealt.q_b.shape().total_measured()))?;
                inp.extend(y_hat);
                world.apply(&inp, &key.e0)?;
                world.apply(&inp, &v.inverse())?;
                (inp, v, sim, ideal)
            }
        }
    };
    tamper(&mut world, adversary, Role::Alice, M_A, &a)?;
    let m_a = world.reduced(&a)?;
    let (b2, _) = bob_evaluates(&mut world, &a, &w, &gc, &l, rng)?;
    tamper(&mut world, adversary, Role::Bob, M_B2, &b2)?;
    let m_b2 = world.reduced(&b2)?;
    let (accept_probability, alice_output) = match ideal {
        None => verify_output(&mut world, &b2, &keys.c_a_out, l, rng)?,
        Some(y) => {
            world.apply(&b2, &keys.c_a_out.inverse())?;
            let zero = |b: &Branch| b.record(ALICE_TRAPS).iter().all(|t| !t);
            if l.lambda > 0 {
                world.measure(&b2[l.m_a..], ALICE_TRAPS, rng)?;
            }
            let p = world.probability(zero);
            if p <= 1e-12 {
                (p, None)
            } else {
                world.condition(zero)?;
                (p, Some(y[..l.m_a].to_vec()))
            }
        }
    };
    Ok(HybridRun {
        world,
        m_b1,
        m_a,
        m_b2,
        c_a_out: keys.c_a_out,
        alice_output,
        bob_output: Vec::new(),
        accept_probability,
        outcome_bits: inst.q.shape().total_measured(),
    })
}

/// The simulator facing a malicious Bob.
pub fn sim_bob<R: Rng + ?Sized>(
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    keys: &Scheme2Keys,
    mode: Mode,
    rng: &mut R,
) -> Result<HybridRun> {
    bob_hybrid(HybridLevel::top(SchemeId::Scheme2), inst, adversary, keys, mode, rng)
}
