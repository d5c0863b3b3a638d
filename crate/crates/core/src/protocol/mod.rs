//! Party machines for both schemes, simulators, hybrid replays and the query loop.

mod adversary;
mod hybrids;
mod qcp;
mod replay;
mod runs;
mod scheme1;
mod scheme2;
mod world;

pub use adversary::{AdversarySpec, Behavior, Tamper};
pub use world::{Branch, Mode, Wire, World, MAX_WORLD_QUBITS};
pub use hybrids::{
    alice_hybrid, bob_hybrid, sim_alice, sim_bob, HybridLevel, HybridRun, SchemeId, HYBRID_MAX_DATA, HYBRID_MAX_LAMBDA,
};
pub use qcp::{qcp_learn, qcp_run, QcpProgram, QcpRun};
pub use replay::{
    alice_view, bob_view, hybrid_replay, scheme1_replay, scheme1_sim, Averaging, Scheme1Instance, SLOT_ACCEPT,
};
pub use runs::{
    repetition_rng, scheme2_reusable, scheme2_run, scheme2_run_with_keys, ReusableRun, ReusableSession,
    Scheme2Instance, Scheme2Keys, Scheme2Outcome,
};
pub use scheme1::{
    scheme1_run, MpqcDealer, Party1Machine, Party2Machine, Scheme1Outcome, S1_OUT1, S1_OUT2, S1_PARTY1, S1_PARTY2,
};
pub use scheme2::{
    eval_cm_on_world, eval_garbled_on_world, verify_output, AliceMachine, BobMachine, DealerMachine, ALICE_TRAPS, BOB_OUTCOMES, BOB_RAW, M_A, M_B1,
    M_B2, TWOPC_1, TWOPC_OUT,
};
