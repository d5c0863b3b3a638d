use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adversary::AdversarySpec;
use super::hybrids::{alice_hybrid, bob_hybrid, HybridLevel, HybridRun, SchemeId};
use super::runs::{Scheme2Instance, Scheme2Keys};
use super::scheme1::scheme1_run;
use super::scheme2::BOB_OUTCOMES;
use super::world::Mode;
use crate::clifford::pauli_twirl;
use crate::error::{Error, Result};
use crate::harness::{Role, ViewDistribution, ViewMethod};
use crate::idealfunc::{qpfe_ideal, ChannelSpec, Verdict};
use crate::qmat::DensityMatrix;

/// How a view is averaged over the protocol's randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Measurement branches kept in superposition; key-encrypted slots
    /// averaged over their Pauli orbit.
    Exact,
    /// Independent runs with fresh keys and sampled measurements.
    MonteCarlo(usize),
}

pub const SLOT_ACCEPT: &str = "alice.accept";

fn twirled(rho: &DensityMatrix, twirl: bool) -> Result<DensityMatrix> {
    if twirl {
        DensityMatrix::from_matrix(pauli_twirl(rho.matrix())?)
    } else {
        Ok(rho.clone())
    }
}

fn accept_slot(p: f64) -> BTreeMap<String, f64> {
    BTreeMap::from([("abort".to_string(), 1.0 - p), ("accept".to_string(), p)])
}

/// Alice's view together with Bob's output: `m_B1`, the decoded `m_B2`,
/// the joint outputs (with Bob's measurement record) and the abort flag.
/// An abort leaves Alice's output register as `I/2^m`.
pub fn alice_view(run: &HybridRun, m_a: usize, twirl: bool) -> Result<ViewDistribution> {
    let decoded = run.c_a_out.inverse().apply(&run.m_b2)?;
    let outputs = match &run.alice_output {
        Some(a) => {
            let wires: Vec<_> = a.iter().chain(&run.bob_output).copied().collect();
            run.world.cq_state(BOB_OUTCOMES, run.outcome_bits, &wires)?
        }
        None => {
            let bob = run.world.cq_state(BOB_OUTCOMES, run.outcome_bits, &run.bob_output)?;
            DensityMatrix::maximally_mixed(m_a).tensor(&bob)
        }
    };
    Ok(ViewDistribution::new(ViewMethod::Exact, 1)
        .quantum("m_B1", twirled(&run.m_b1, twirl)?)
        .quantum("m_B2.decoded", decoded)
        .quantum("outputs", outputs)
        .classical(SLOT_ACCEPT, accept_slot(run.accept_probability)))
}

/// Bob's view together with Alice's output: `m_A`, the register Bob evaluates
/// to and returns, Alice's output and the abort flag.
pub fn bob_view(run: &HybridRun, m_a: usize, twirl: bool) -> Result<ViewDistribution> {
    let alice = match &run.alice_output {
        Some(a) => run.world.reduced(a)?,
        None => DensityMatrix::maximally_mixed(m_a),
    };
    Ok(ViewDistribution::new(ViewMethod::Exact, 1)
        .quantum("m_A", twirled(&run.m_a, twirl)?)
        .quantum("m_B2", twirled(&run.m_b2, twirl)?)
        .quantum("alice.output", alice)
        .classical(SLOT_ACCEPT, accept_slot(run.accept_probability)))
}

/// Averaged view of a Scheme 2 hybrid; `side` names the corrupted party.
pub fn hybrid_replay<R: Rng + ?Sized>(
    level: HybridLevel,
    side: Role,
    inst: &Scheme2Instance,
    adversary: &AdversarySpec,
    averaging: Averaging,
    rng: &mut R,
) -> Result<ViewDistribution> {
    if level.scheme != SchemeId::Scheme2 {
        return Err(Error::Protocol("use scheme1_replay for the first scheme".into()));
    }
    if averaging == Averaging::Exact && !adversary.tamper.is_empty() {
        return Err(Error::Protocol(
            "Pauli-orbit averaging needs a non-tampering adversary; use Monte Carlo".into(),
        ));
    }
    let once = |mode: Mode, twirl: bool, rng: &mut R| -> Result<ViewDistribution> {
        let none = Scheme2Keys::default();
        match side {
            Role::Alice => alice_view(
                &alice_hybrid(level.index, inst, adversary, &none, mode, rng)?,
                inst.layout.m_a,
                twirl,
            ),
            Role::Bob => bob_view(
                &bob_hybrid(level.index, inst, adversary, &none, mode, rng)?,
                inst.layout.m_a,
                twirl,
            ),
            Role::Dealer => Err(Error::Protocol("the dealer is never corrupted".into())),
        }
    };
    match averaging {
        Averaging::Exact => once(Mode::Exact, true, rng),
        Averaging::MonteCarlo(n) => {
            let runs = (0..n.max(1))
                .map(|_| once(Mode::Sampled, false, rng))
                .collect::<Result<Vec<_>>>()?;
            let mut v = ViewDistribution::average(&runs)?;
            v.method = ViewMethod::MonteCarlo;
            Ok(v)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scheme1Instance {
    pub channel: ChannelSpec,
    pub rho_a: DensityMatrix,
    pub rho_b: DensityMatrix,
    /// Output qubits kept by party 1.
    pub split: usize,
}

fn output_or_mixed(rho: Option<DensityMatrix>, n: usize) -> DensityMatrix {
    rho.unwrap_or_else(|| DensityMatrix::maximally_mixed(n))
}

/// Ideal-world execution: the simulator forwards the (possibly substituted)
/// inputs to the QPFE functionality and relays the outputs.
pub fn scheme1_sim(inst: &Scheme1Instance, adversary: &AdversarySpec) -> Result<(DensityMatrix, DensityMatrix)> {
    let out_b = inst.channel.out_qubits() - inst.split;
    let inputs = [
        adversary.input_for(Role::Alice, &inst.rho_a),
        adversary.input_for(Role::Bob, &inst.rho_b),
    ];
    let ideal = qpfe_ideal(&inst.channel, &inputs, &[inst.split, out_b], Verdict::Continue, false)?;
    let mut outs = ideal.outputs.into_iter().flatten();
    Ok((
        output_or_mixed(outs.next(), inst.split),
        output_or_mixed(outs.next(), out_b),
    ))
}

/// Both parties' outputs at level 0 (real) or 1 (simulated).
pub fn scheme1_replay<R: Rng + ?Sized>(
    level: HybridLevel,
    inst: &Scheme1Instance,
    adversary: &AdversarySpec,
    rng: &mut R,
) -> Result<ViewDistribution> {
    if level.scheme != SchemeId::Scheme1 {
        return Err(Error::Protocol("use hybrid_replay for the second scheme".into()));
    }
    let out_b = inst.channel.out_qubits() - inst.split;
    let (t1, t2) = if level.index == 0 {
        let run = scheme1_run(&inst.channel, &inst.rho_a, &inst.rho_b, inst.split, adversary, rng)?;
        (output_or_mixed(run.tau_1, inst.split), output_or_mixed(run.tau_2, out_b))
    } else {
        scheme1_sim(inst, adversary)?
    };
    Ok(ViewDistribution::new(ViewMethod::Exact, 1)
        .quantum("party1.output", t1)
        .quantum("party2.output", t2))
}
