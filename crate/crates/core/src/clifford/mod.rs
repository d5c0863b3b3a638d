//! Pauli and Clifford machinery plus the Clifford + measurement circuit model.

mod auth;
mod circuit;
mod gates;
mod group;
mod pauli;
mod qotp;
mod sampler;
mod tableau;

pub use auth::{auth_encode, auth_verify, auth_verify_sampled, split_traps, AuthCiphertext, AuthVerification};
pub use circuit::{
    all_strings, bit_string, bits_to_int, branches_to_cq, cm_eval, cm_eval_exact, int_to_bits, CircuitShape,
    CmBranch, CmCircuit, CmLayer, CmRun, Selector,
};
pub use gates::{compile_t_gadget, compiled_input, t_state, zero_states, CompiledCircuit, Gate, GateCircuit};
pub use group::{clifford_group_size, enumerate_cliffords};
pub use pauli::PauliOp;
pub use qotp::{pauli_twirl, qotp_decrypt, qotp_encrypt};
pub use sampler::random_clifford;
pub use tableau::CliffordOp;
