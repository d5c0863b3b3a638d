//! Trusted-dealer stand-ins for every black-box functionality.

mod dealer;
mod ideal;
mod protocol1;

pub use dealer::{DealerSession, Phase, Verdict};
pub use ideal::{
    classical_pfe_a3, mpqc_ideal, qpfe_ideal, ChannelSpec, ExperimentKeys, IdealOutcome, CNOT_MEASURE,
};
pub use protocol1::{
    build_q_b, classical_2pc_protocol1, twopc_1, twopc_2, twopc_out, u_dec, AliceTwoPcInput, BobTwoPcInput,
    BobTwoPcOutput, Protocol1Output, Scheme2Layout, TwoPcKind, TwoPcMessage,
};
