//! Dense statevectors, sparse operator action and exponentials of
//! anti-Hermitian generators.

mod evolve;
mod observable;
mod sparse;
mod statevector;

pub use evolve::{evolve, expm_multiply, ucc_state, EvolutionMode, EvolutionPlan, Generator};
pub use observable::Observable;
pub use sparse::SparseOperator;
pub use statevector::{apply, apply_fermion, expectation, prepare_reference, StateVector};
