use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::DensityMatrix;

/// Scheme 1 reuses `Alice` for party 1 and `Bob` for party 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Alice,
    Bob,
    Dealer,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
            Role::Dealer => "dealer",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub round: u32,
    pub sender: Role,
    pub receiver: Role,
    pub label: String,
    pub classical: Vec<u8>,
    /// Reduced state of the sent register at send time, averaged over branches.
    pub quantum: Option<DensityMatrix>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub party: Role,
    pub round: u32,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
    pub abort: Option<AbortInfo>,
}

impl Transcript {
    pub fn push(&mut self, event: Event) -> Result<()> {
        if let Some(last) = self.events.last() {
            if event.round < last.round {
                return Err(Error::Protocol(format!(
                    "event in round {} after round {}",
                    event.round, last.round
                )));
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }

    pub fn find(&self, label: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.label == label)
    }

    pub fn last_round(&self) -> u32 {
        self.events.last().map_or(0, |e| e.round)
    }

    /// Events not involving the dealer.
    pub fn party_lane(&self) -> impl Iterator<Item = &Event> {
        self.events
            .iter()
            .filter(|e| e.sender != Role::Dealer && e.receiver != Role::Dealer)
    }

    /// One JSON object per line: every event, then the abort record if any.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        if let Some(a) = &self.abort {
            serde_json::to_writer(&mut out, &serde_json::json!({ "abort": a }))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn event(round: u32) -> Event {
        Event {
            round,
            sender: Role::Alice,
            receiver: Role::Bob,
            label: "m".into(),
            classical: vec![1, 2],
            quantum: Some(DensityMatrix::zeros(1)),
        }
    }

    #[test]
    fn rounds_are_monotone() {
        let mut t = Transcript::default();
        t.push(event(1)).unwrap();
        t.push(event(2)).unwrap();
        assert!(t.push(event(1)).is_err());
    }

    #[test]
    fn jsonl_has_one_line_per_event() {
        let mut t = Transcript::default();
        t.push(event(1)).unwrap();
        t.abort = Some(AbortInfo {
            party: Role::Alice,
            round: 1,
            reason: "trap".into(),
        });
        let text = t.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        let first: Event = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, t.events[0]);
    }
}
