pub mod clifford;
pub mod pauli;
pub mod rotation;

pub use clifford::{clifford_to_unitary, sample_clifford, CliffordElement, MAX_CLIFFORD_ARITY};
pub use pauli::{pauli_matrix, Pauli, PauliString};
pub use rotation::{pauli6_effects, rotation_unitary, RotationLabel};
