//! Simulated network, transcripts, view comparison and the two-qubit experiment.

mod experiment;
mod network;
mod transcript;
mod views;

pub use network::{audit_privacy, run_network, take_message, Incoming, Outgoing, PartyMachine, Step, MAX_ROUNDS};
pub use transcript::{AbortInfo, Event, Role, Transcript};
pub use views::{compare_views, tv_distance, DistinguishabilityReport, Slot, SlotValue, ViewDistribution, ViewMethod};
pub use experiment::{
    correction_error, distance_from_mixed, eavesdropper_view, encrypted_distribution, experiment_encrypted,
    experiment_plain, imbalance, EavesdropperView, EncryptedResult, ExperimentInputs, Histogram, PlainResult,
};
