use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adversary::AdversarySpec;
use super::scheme2::{from_json, to_json};
use super::world::{Mode, Wire, World};
use crate::channels::{choi_of_channel, ChoiMatrix};
use crate::error::{Error, Result};
use crate::harness::{audit_privacy, run_network, take_message, Incoming, Outgoing, PartyMachine, Role, Step, Transcript};
use crate::idealfunc::{mpqc_ideal, ChannelSpec, Verdict};
use crate::qmat::{ComplexMatrix, DensityMatrix};

pub const S1_PARTY1: &str = "s1.party1";
pub const S1_PARTY2: &str = "s1.party2";
pub const S1_OUT1: &str = "s1.out1";
pub const S1_OUT2: &str = "s1.out2";

/// Register widths party 1 announces to the dealer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Party1Shape {
    n_a: usize,
    choi_in: usize,
    choi_out: usize,
    split: usize,
}

fn choi_of(channel: &ChannelSpec) -> ChoiMatrix {
    match channel {
        ChannelSpec::Kraus(k) => choi_of_channel(k),
        ChannelSpec::Choi(c) => c.clone(),
    }
}

/// Party 1: holds `𝓔` and a classical description of `ρ_A`; receives the first `split` output qubits.
pub struct Party1Machine {
    choi: ChoiMatrix,
    rho_a: DensityMatrix,
    split: usize,
    sent: bool,
    pub output: Option<Vec<Wire>>,
    /// `Tr G` as reported by the dealer.
    pub success_probability: Option<f64>,
}

impl Party1Machine {
    pub fn new(channel: &ChannelSpec, rho_a: DensityMatrix, split: usize) -> Self {
        Self {
            choi: choi_of(channel),
            rho_a,
            split,
            sent: false,
            output: None,
            success_probability: None,
        }
    }
}

impl PartyMachine for Party1Machine {
    fn role(&self) -> Role {
        Role::Alice
    }

    fn step(
        &mut self,
        _round: u32,
        inbox: &mut Vec<Incoming>,
        world: &mut World,
        _rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Outgoing>, Step)> {
        if !self.sent {
            self.sent = true;
            let mut wires = world.alloc(&self.rho_a.transpose())?;
            wires.extend(world.alloc(&self.choi.normalized()?)?);
            let shape = Party1Shape {
                n_a: self.rho_a.qubits(),
                choi_in: self.choi.in_qubits(),
                choi_out: self.choi.out_qubits(),
                split: self.split,
            };
            let msg = Outgoing::new(Role::Dealer, S1_PARTY1).classical(to_json(&shape)).quantum(wires);
            return Ok((vec![msg], Step::Continue));
        }
        match take_message(inbox, S1_OUT1) {
            Some(m) => {
                let bytes: [u8; 8] = m
                    .classical
                    .as_slice()
                    .try_into()
                    .map_err(|_| Error::Protocol("malformed success probability".into()))?;
                self.success_probability = Some(f64::from_le_bytes(bytes));
                self.output = Some(m.quantum);
                Ok((Vec::new(), Step::Done))
            }
            None => Ok((Vec::new(), Step::Continue)),
        }
    }

    fn private_blobs(&self) -> Vec<Vec<u8>> {
        vec![to_json(self.rho_a.matrix()), to_json(self.choi.matrix())]
    }
}

/// Party 2: holds a classical description of `ρ_B`.
pub struct Party2Machine {
    rho_b: DensityMatrix,
    sent: bool,
    pub output: Option<Vec<Wire>>,
}

impl Party2Machine {
    pub fn new(rho_b: DensityMatrix) -> Self {
        Self {
            rho_b,
            sent: false,
            output: None,
        }
    }
}

impl PartyMachine for Party2Machine {
    fn role(&self) -> Role {
        Role::Bob
    }

    fn step(
        &mut self,
        _round: u32,
        inbox: &mut Vec<Incoming>,
        world: &mut World,
        _rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Outgoing>, Step)> {
        if !self.sent {
            self.sent = true;
            let wires = world.alloc(&self.rho_b.transpose())?;
            return Ok((vec![Outgoing::new(Role::Dealer, S1_PARTY2).quantum(wires)], Step::Continue));
        }
        match take_message(inbox, S1_OUT2) {
            Some(m) => {
                self.output = Some(m.quantum);
                Ok((Vec::new(), Step::Done))
            }
            None => Ok((Vec::new(), Step::Continue)),
        }
    }

    fn private_blobs(&self) -> Vec<Vec<u8>> {
        vec![to_json(self.rho_b.matrix())]
    }
}

/// MPQC dealer evaluating `G` on the registers it receives.
#[derive(Default)]
pub struct MpqcDealer {
    party1: Option<Incoming>,
    party2: Option<Incoming>,
    /// The subnormalized `G` before the dealer rescales it for delivery.
    pub g: Option<ComplexMatrix>,
}

impl PartyMachine for MpqcDealer {
    fn role(&self) -> Role {
        Role::Dealer
    }

    fn step(
        &mut self,
        _round: u32,
        inbox: &mut Vec<Incoming>,
        world: &mut World,
        _rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Outgoing>, Step)> {
        if self.party1.is_none() {
            self.party1 = take_message(inbox, S1_PARTY1);
        }
        if self.party2.is_none() {
            self.party2 = take_message(inbox, S1_PARTY2);
        }
        let (Some(p1), Some(p2)) = (&self.party1, &self.party2) else {
            return Ok((Vec::new(), Step::Continue));
        };
        let shape: Party1Shape = from_json(&p1.classical, "party 1 shape")?;
        if shape.n_a + p2.quantum.len() != shape.choi_in
            || p1.quantum.len() != shape.n_a + shape.choi_in + shape.choi_out
            || shape.split > shape.choi_out
        {
            return Err(Error::Shape(format!(
                "registers of {} and {} qubits do not fit {shape:?}",
                p1.quantum.len(),
                p2.quantum.len()
            )));
        }
        let (rho_wires, choi_wires) = p1.quantum.split_at(shape.n_a);
        let rho1 = world.reduced(rho_wires)?;
        let rho2 = world.reduced(choi_wires)?;
        let rho3 = world.reduced(&p2.quantum)?;
        let g = mpqc_ideal(&rho1, &rho2, &[rho3], Verdict::Continue, false)?.expect("continue delivers");
        let inputs: Vec<Wire> = p1.quantum.iter().chain(&p2.quantum).copied().collect();
        world.release(&inputs)?;
        let trace = g.trace().re;
        let out = world.alloc(&DensityMatrix::from_matrix(g.scale_real(1.0 / trace))?)?;
        self.g = Some(g);
        let (to1, to2) = out.split_at(shape.split);
        Ok((
            vec![
                Outgoing::new(Role::Alice, S1_OUT1)
                    .classical(trace.to_le_bytes().to_vec())
                    .quantum(to1.to_vec()),
                Outgoing::new(Role::Bob, S1_OUT2).quantum(to2.to_vec()),
            ],
            Step::Done,
        ))
    }
}

pub struct Scheme1Outcome {
    pub transcript: Transcript,
    /// `Tr(Υ)·G` restricted to party 1's output qubits.
    pub tau_1: Option<DensityMatrix>,
    pub tau_2: Option<DensityMatrix>,
    pub success_probability: Option<f64>,
    pub g: Option<ComplexMatrix>,
    pub leaks: Vec<String>,
}

/// Runs Scheme 1; party 1 keeps the first `split` output qubits.
pub fn scheme1_run<R: Rng + ?Sized>(
    channel: &ChannelSpec,
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    split: usize,
    adversary: &AdversarySpec,
    rng: &mut R,
) -> Result<Scheme1Outcome> {
    let mut world = World::new(Mode::Exact);
    let mut p1 = Party1Machine::new(channel, adversary.input_for(Role::Alice, rho_a), split);
    let mut p2 = Party2Machine::new(adversary.input_for(Role::Bob, rho_b));
    let mut dealer = MpqcDealer::default();
    let transcript = run_network(&mut [&mut p1, &mut p2, &mut dealer], &mut world, adversary, rng)?;
    let leaks = audit_privacy(&transcript, &[&p1 as &dyn PartyMachine, &p2, &dealer]);
    let reduce = |w: &Option<Vec<Wire>>| w.as_ref().map(|w| world.reduced(w)).transpose();
    Ok(Scheme1Outcome {
        tau_1: reduce(&p1.output)?,
        tau_2: reduce(&p2.output)?,
        success_probability: p1.success_probability,
        g: dealer.g,
        leaks,
        transcript,
    })
}
