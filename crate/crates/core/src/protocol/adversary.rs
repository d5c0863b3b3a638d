use serde::{Deserialize, Serialize};

use crate::clifford::PauliOp;
use crate::error::{Error, Result};
use crate::harness::Role;
use crate::qmat::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Behavior {
    Honest,
    /// Follows the protocol; its view is recorded.
    SemiHonest,
    Malicious,
}

/// Modification applied to every message with a matching label from the corrupted party.
#[derive(Clone, Debug, PartialEq)]
pub struct Tamper {
    pub label: String,
    pub pauli: Option<PauliOp>,
    /// XORed cyclically into the classical payload.
    pub classical_xor: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversarySpec {
    pub corrupted: Option<Role>,
    pub behavior: Behavior,
    pub substitute: Option<DensityMatrix>,
    pub tamper: Vec<Tamper>,
    /// The corrupted party stops before acting in this round.
    pub abort_round: Option<u32>,
}

impl Default for AdversarySpec {
    fn default() -> Self {
        Self::honest()
    }
}

impl AdversarySpec {
    pub fn honest() -> Self {
        Self {
            corrupted: None,
            behavior: Behavior::Honest,
            substitute: None,
            tamper: Vec::new(),
            abort_round: None,
        }
    }

    pub fn semi_honest(role: Role) -> Self {
        Self {
            corrupted: Some(role),
            behavior: Behavior::SemiHonest,
            ..Self::honest()
        }
    }

    pub fn malicious(role: Role) -> Self {
        Self {
            corrupted: Some(role),
            behavior: Behavior::Malicious,
            ..Self::honest()
        }
    }

    pub fn with_substitute(mut self, rho: DensityMatrix) -> Self {
        self.substitute = Some(rho);
        self
    }

    pub fn with_tamper(mut self, t: Tamper) -> Self {
        self.tamper.push(t);
        self
    }

    pub fn with_abort_round(mut self, round: u32) -> Self {
        self.abort_round = Some(round);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.corrupted.is_none() && self.behavior != Behavior::Honest {
            return Err(Error::Protocol("a corrupted behavior needs a corrupted party".into()));
        }
        if self.corrupted == Some(Role::Dealer) {
            return Err(Error::Protocol("the dealer is trusted and cannot be corrupted".into()));
        }
        let active = self.substitute.is_some() || !self.tamper.is_empty() || self.abort_round.is_some();
        if active && self.behavior != Behavior::Malicious {
            return Err(Error::Protocol("substitution, tampering and aborts require a malicious adversary".into()));
        }
        Ok(())
    }

    pub fn controls(&self, role: Role) -> bool {
        self.corrupted == Some(role)
    }

    /// The input `role` actually uses.
    pub fn input_for(&self, role: Role, honest: &DensityMatrix) -> DensityMatrix {
        match (&self.substitute, self.controls(role)) {
            (Some(s), true) => s.clone(),
            _ => honest.clone(),
        }
    }

    pub fn tamper_for(&self, sender: Role, label: &str) -> Option<&Tamper> {
        if !self.controls(sender) {
            return None;
        }
        self.tamper.iter().find(|t| t.label == label)
    }

    pub fn aborts(&self, role: Role, round: u32) -> bool {
        self.controls(role) && self.abort_round == Some(round)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rules() {
        assert!(AdversarySpec::honest().validate().is_ok());
        assert!(AdversarySpec::semi_honest(Role::Dealer).validate().is_err());
        assert!(AdversarySpec::semi_honest(Role::Bob).with_abort_round(2).validate().is_err());
        assert!(AdversarySpec::malicious(Role::Bob).with_abort_round(2).validate().is_ok());
    }

    #[test]
    fn substitution_only_for_corrupted_party() {
        let adv = AdversarySpec::malicious(Role::Bob).with_substitute(DensityMatrix::named("1").unwrap());
        let honest = DensityMatrix::zeros(1);
        assert_eq!(adv.input_for(Role::Alice, &honest), honest);
        assert_ne!(adv.input_for(Role::Bob, &honest), honest);
    }
}
