use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::Role;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Collecting,
    Computed,
    Delivered,
    Aborted,
}

/// The adversary's instruction to the functionality once outputs exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Continue,
    Abort,
}

/// Trusted party collecting one input per role and releasing outputs.
#[derive(Clone, Debug)]
pub struct DealerSession<I, O> {
    pub id: u64,
    parties: Vec<Role>,
    inputs: BTreeMap<Role, I>,
    outputs: BTreeMap<Role, O>,
    phase: Phase,
}

impl<I, O: Clone> DealerSession<I, O> {
    pub fn new(id: u64, parties: &[Role]) -> Self {
        Self {
            id,
            parties: parties.to_vec(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            phase: Phase::Collecting,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn register(&mut self, role: Role, input: I) -> Result<()> {
        if self.phase != Phase::Collecting {
            return Err(Error::Protocol(format!("session {} no longer accepts inputs", self.id)));
        }
        if !self.parties.contains(&role) {
            return Err(Error::Protocol(format!("{role} is not a party of session {}", self.id)));
        }
        if self.inputs.contains_key(&role) {
            return Err(Error::Protocol(format!("{role} already registered in session {}", self.id)));
        }
        self.inputs.insert(role, input);
        Ok(())
    }

    pub fn ready(&self) -> bool {
        self.parties.iter().all(|p| self.inputs.contains_key(p))
    }

    pub fn inputs(&self) -> &BTreeMap<Role, I> {
        &self.inputs
    }

    /// Runs `f` once every input is present; otherwise stays collecting and errors.
    pub fn compute<F>(&mut self, f: F) -> Result<()>
    where
        F: FnOnce(&BTreeMap<Role, I>) -> Result<BTreeMap<Role, O>>,
    {
        match self.phase {
            Phase::Collecting if self.ready() => {
                self.outputs = f(&self.inputs)?;
                self.phase = Phase::Computed;
                Ok(())
            }
            Phase::Collecting => Err(Error::Protocol(format!("session {} is missing inputs", self.id))),
            other => Err(Error::Protocol(format!("session {} already {other:?}", self.id))),
        }
    }

    pub fn abort(&mut self) {
        self.outputs.clear();
        self.phase = Phase::Aborted;
    }

    /// Releases outputs on `Continue`, or on `Abort` when delivery is guaranteed.
    pub fn deliver(&mut self, verdict: Verdict, guaranteed_delivery: bool) -> Result<Option<BTreeMap<Role, O>>> {
        match self.phase {
            Phase::Computed => {}
            Phase::Aborted => return Ok(None),
            other => return Err(Error::Protocol(format!("cannot deliver in phase {other:?}"))),
        }
        if verdict == Verdict::Abort && !guaranteed_delivery {
            self.abort();
            return Ok(None);
        }
        self.phase = Phase::Delivered;
        Ok(Some(self.outputs.clone()))
    }

    /// Output for `role`, only after delivery.
    pub fn output(&self, role: Role) -> Option<&O> {
        if self.phase == Phase::Delivered {
            self.outputs.get(&role)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> DealerSession<u8, u8> {
        DealerSession::new(1, &[Role::Alice, Role::Bob])
    }

    fn swap(inputs: &BTreeMap<Role, u8>) -> Result<BTreeMap<Role, u8>> {
        Ok(BTreeMap::from([(Role::Alice, inputs[&Role::Bob]), (Role::Bob, inputs[&Role::Alice])]))
    }

    #[test]
    fn outputs_only_after_delivery() {
        let mut s = session();
        s.register(Role::Alice, 1).unwrap();
        assert!(s.compute(swap).is_err());
        assert_eq!(s.phase(), Phase::Collecting);
        s.register(Role::Bob, 2).unwrap();
        s.compute(swap).unwrap();
        assert_eq!(s.output(Role::Alice), None);
        let out = s.deliver(Verdict::Continue, false).unwrap().unwrap();
        assert_eq!(out[&Role::Alice], 2);
        assert_eq!(s.output(Role::Bob), Some(&1));
    }

    #[test]
    fn abort_is_terminal() {
        let mut s = session();
        s.register(Role::Alice, 1).unwrap();
        s.register(Role::Bob, 2).unwrap();
        s.compute(swap).unwrap();
        assert_eq!(s.deliver(Verdict::Abort, false).unwrap(), None);
        assert_eq!(s.phase(), Phase::Aborted);
        assert!(s.register(Role::Alice, 3).is_err());
        assert_eq!(s.deliver(Verdict::Continue, false).unwrap(), None);
    }

    #[test]
    fn guaranteed_delivery_ignores_abort() {
        let mut s = session();
        s.register(Role::Alice, 1).unwrap();
        s.register(Role::Bob, 2).unwrap();
        s.compute(swap).unwrap();
        assert!(s.deliver(Verdict::Abort, true).unwrap().is_some());
    }
}
