//! Dense complex linear algebra and density-operator primitives.

mod density;
mod local;
mod matrix;
mod povm;
pub mod random;

pub use density::{
    default_labels, matrix_trace_distance, partial_trace, permute_qubits, qubits_of,
    trace_distance, DensityMatrix,
};
pub use matrix::{ComplexMatrix, C64, I, ONE, ZERO};
pub use povm::{measure_povm, sample, Povm, PovmOutcome};

/// Hermiticity tolerance.
pub const TAU_H: f64 = 1e-10;
/// Trace tolerance.
pub const TAU_T: f64 = 1e-10;
/// Floor below which a negative eigenvalue counts as a PSD violation.
pub const TAU_P: f64 = 1e-9;
