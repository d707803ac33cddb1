//! Statevector simulation of the data-encoding circuits and the fidelity
//! kernels built on top of them.
//!
//! Qubit `q` (zero based, so one-based qubit 1 is `q = 0`) is stored as bit
//! `n - 1 - q` of the basis index, i.e. qubit 0 is the most significant
//! position. Pauli strings use the same ordering.

mod ansatz;
mod kernel;
mod pauli;
mod state;

pub use ansatz::{AnsatzSpec, Family, MAX_QUBITS};
pub use kernel::{
    cross_from_states, cross_kernel, encode_rows, gram_from_states, kernel_matrix, kernel_value,
    overlap_fidelity,
};
pub use pauli::{
    effective_rank_probe, pauli_string, pauli_vector, write_pauli_csv, PauliVector,
    MAX_PAULI_QUBITS,
};
pub use state::{build_state, StateVector};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("input shape mismatch: expected {expected} entries, got {found}")]
    InputShape { expected: usize, found: usize },
    #[error("{what} limited to {limit} qubits, requested {n_qubits}")]
    ResourceLimit {
        what: &'static str,
        n_qubits: usize,
        limit: usize,
    },
    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),
    #[error("i/o error: {0}")]
    Io(String),
}
