use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transcript::{AbortInfo, Event, Role, Transcript};
use crate::error::{Error, Result};
use crate::protocol::{AdversarySpec, Wire, World};

/// Rounds after which a run that has not terminated counts as deadlocked.
pub const MAX_ROUNDS: u32 = 64;

#[derive(Clone, Debug)]
pub struct Outgoing {
    pub receiver: Role,
    pub label: String,
    pub classical: Vec<u8>,
    pub quantum: Vec<Wire>,
}

impl Outgoing {
    pub fn new(receiver: Role, label: &str) -> Self {
        Self {
            receiver,
            label: label.to_string(),
            classical: Vec::new(),
            quantum: Vec::new(),
        }
    }

    pub fn classical(mut self, bytes: Vec<u8>) -> Self {
        self.classical = bytes;
        self
    }

    pub fn quantum(mut self, wires: Vec<Wire>) -> Self {
        self.quantum = wires;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Incoming {
    pub round: u32,
    pub sender: Role,
    pub label: String,
    pub classical: Vec<u8>,
    pub quantum: Vec<Wire>,
}

/// Pulls the message labelled `label` out of an inbox.
pub fn take_message(inbox: &mut Vec<Incoming>, label: &str) -> Option<Incoming> {
    let pos = inbox.iter().position(|m| m.label == label)?;
    Some(inbox.remove(pos))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Continue,
    Done,
    Abort(String),
}

pub trait PartyMachine {
    fn role(&self) -> Role;

    /// Consumes messages from `inbox` and returns new ones; unconsumed
    /// messages stay queued for later rounds.
    fn step(
        &mut self,
        round: u32,
        inbox: &mut Vec<Incoming>,
        world: &mut World,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<Outgoing>, Step)>;

    /// Serialized private inputs and keys, for the leakage audit.
    fn private_blobs(&self) -> Vec<Vec<u8>> {
        Vec::new()
    }
}

fn xor_cyclic(data: &mut [u8], mask: &[u8]) {
    if mask.is_empty() {
        return;
    }
    for (i, b) in data.iter_mut().enumerate() {
        *b ^= mask[i % mask.len()];
    }
}

/// Synchronous round-robin execution: messages sent in round `r` are
/// delivered at round `r + 1`, machines act in slice order, and each
/// machine draws from its own rng stream derived from `rng`.
pub fn run_network<R: Rng + ?Sized>(
    machines: &mut [&mut dyn PartyMachine],
    world: &mut World,
    adversary: &AdversarySpec,
    rng: &mut R,
) -> Result<Transcript> {
    adversary.validate()?;
    let mut roles: Vec<Role> = machines.iter().map(|m| m.role()).collect();
    roles.sort();
    roles.dedup();
    if roles.len() != machines.len() {
        return Err(Error::Protocol("machine roles must be distinct".into()));
    }
    let mut rngs: Vec<ChaCha8Rng> = machines.iter().map(|_| ChaCha8Rng::seed_from_u64(rng.gen())).collect();
    let mut inboxes: BTreeMap<Role, Vec<Incoming>> = BTreeMap::new();
    let mut done = vec![false; machines.len()];
    let mut transcript = Transcript::default();
    for round in 1..=MAX_ROUNDS {
        let mut delivered = Vec::new();
        for (i, m) in machines.iter_mut().enumerate() {
            if done[i] {
                continue;
            }
            let role = m.role();
            if adversary.aborts(role, round) {
                transcript.abort = Some(AbortInfo {
                    party: role,
                    round,
                    reason: "adversary abort".into(),
                });
                return Ok(transcript);
            }
            let inbox = inboxes.entry(role).or_default();
            let (out, step) = m.step(round, inbox, world, &mut rngs[i])?;
            for mut o in out {
                if let Some(t) = adversary.tamper_for(role, &o.label) {
                    if let Some(p) = &t.pauli {
                        world.apply_pauli(&o.quantum, p)?;
                    }
                    xor_cyclic(&mut o.classical, &t.classical_xor);
                }
                let quantum = if o.quantum.is_empty() {
                    None
                } else {
                    Some(world.reduced(&o.quantum)?)
                };
                transcript.push(Event {
                    round,
                    sender: role,
                    receiver: o.receiver,
                    label: o.label.clone(),
                    classical: o.classical.clone(),
                    quantum,
                })?;
                delivered.push((
                    o.receiver,
                    Incoming {
                        round,
                        sender: role,
                        label: o.label,
                        classical: o.classical,
                        quantum: o.quantum,
                    },
                ));
            }
            match step {
                Step::Continue => {}
                Step::Done => done[i] = true,
                Step::Abort(reason) => {
                    transcript.abort = Some(AbortInfo {
                        party: role,
                        round,
                        reason,
                    });
                    return Ok(transcript);
                }
            }
        }
        let sent = !delivered.is_empty();
        for (to, msg) in delivered {
            inboxes.entry(to).or_default().push(msg);
        }
        if done.iter().all(|d| *d) {
            return Ok(transcript);
        }
        let pending = inboxes.values().any(|v| !v.is_empty());
        if !sent && !pending {
            return Err(Error::Deadlock(round));
        }
    }
    Err(Error::Deadlock(MAX_ROUNDS))
}

/// Labels of party-lane events carrying a private blob of another machine
/// byte for byte, plus dealer-bound events carrying blobs of a machine other
/// than the sender.
pub fn audit_privacy(transcript: &Transcript, machines: &[&dyn PartyMachine]) -> Vec<String> {
    let mut leaks = Vec::new();
    for e in &transcript.events {
        let serialized = e.quantum.as_ref().map(|q| serde_json::to_vec(q.matrix()).expect("serializable"));
        for m in machines {
            if m.role() == e.receiver || (m.role() == e.sender && e.receiver == Role::Dealer) {
                continue;
            }
            for blob in m.private_blobs() {
                if blob.is_empty() {
                    continue;
                }
                let in_classical = e.classical.windows(blob.len()).any(|w| w == blob.as_slice());
                let in_quantum = serialized.as_ref().is_some_and(|s| s == &blob);
                if in_classical || in_quantum {
                    leaks.push(format!("{} ({} -> {})", e.label, e.sender, e.receiver));
                }
            }
        }
    }
    leaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::Mode;
    use crate::qmat::DensityMatrix;

    struct Sender {
        wires: Vec<Wire>,
        sent: bool,
    }

    impl PartyMachine for Sender {
        fn role(&self) -> Role {
            Role::Alice
        }
        fn step(&mut self, _: u32, _: &mut Vec<Incoming>, _: &mut World, _: &mut ChaCha8Rng) -> Result<(Vec<Outgoing>, Step)> {
            if self.sent {
                return Ok((Vec::new(), Step::Done));
            }
            self.sent = true;
            let msg = Outgoing::new(Role::Bob, "hello").classical(vec![9]).quantum(self.wires.clone());
            Ok((vec![msg], Step::Done))
        }
        fn private_blobs(&self) -> Vec<Vec<u8>> {
            vec![vec![7]]
        }
    }

    struct Receiver {
        got: bool,
    }

    impl PartyMachine for Receiver {
        fn role(&self) -> Role {
            Role::Bob
        }
        fn step(&mut self, _: u32, inbox: &mut Vec<Incoming>, _: &mut World, _: &mut ChaCha8Rng) -> Result<(Vec<Outgoing>, Step)> {
            if take_message(inbox, "hello").is_some() {
                self.got = true;
                return Ok((Vec::new(), Step::Done));
            }
            Ok((Vec::new(), Step::Continue))
        }
    }

    fn run(adv: &AdversarySpec) -> Result<Transcript> {
        let mut world = World::new(Mode::Exact);
        let wires = world.alloc(&DensityMatrix::zeros(1)).unwrap();
        let mut a = Sender { wires, sent: false };
        let mut b = Receiver { got: false };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        run_network(&mut [&mut a, &mut b], &mut world, adv, &mut rng)
    }

    #[test]
    fn one_message_one_event() {
        let t = run(&AdversarySpec::honest()).unwrap();
        assert_eq!(t.events.len(), 1);
        assert_eq!(t.to_jsonl(), run(&AdversarySpec::honest()).unwrap().to_jsonl());
    }

    #[test]
    fn abort_truncates() {
        let t = run(&AdversarySpec::malicious(Role::Alice).with_abort_round(1)).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.abort.unwrap().round, 1);
    }

    #[test]
    fn receiver_alone_deadlocks() {
        let mut world = World::new(Mode::Exact);
        let mut b = Receiver { got: false };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let err = run_network(&mut [&mut b], &mut world, &AdversarySpec::honest(), &mut rng).unwrap_err();
        assert_eq!(err, Error::Deadlock(1));
    }

    #[test]
    fn audit_flags_classical_copy() {
        let t = run(&AdversarySpec::honest()).unwrap();
        let a = Sender { wires: vec![], sent: true };
        assert_eq!(audit_privacy(&t, &[&a]).len(), 0);
        let mut leaked = t.clone();
        leaked.events[0].classical = vec![1, 7];
        leaked.events[0].sender = Role::Bob;
        leaked.events[0].receiver = Role::Dealer;
        assert_eq!(audit_privacy(&leaked, &[&a]).len(), 1);
    }
}
