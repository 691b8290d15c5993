//! Statevector simulation of variational quantum eigensolvers for periodic
//! electronic-structure Hamiltonians.
//!
//! The crate is organised bottom-up:
//!
//! - [`ops`]: fermionic and Pauli operator algebra, the Jordan–Wigner map and
//!   crystal-momentum-conserving, spin-adapted operator pools.
//! - [`hamiltonian`]: integral containers, the PFCIDUMP file format,
//!   second-quantized Hamiltonian assembly and analytic lattice models.
//! - [`state`]: dense statevectors, sparse operator action and exponentials of
//!   anti-Hermitian generators.
//! - [`fci`]: exact diagonalization in particle-number / S_z sectors.
//! - [`vqe`]: UCC-VQE minimization and the ADAPT-VQE loop.
//! - [`k2g`]: realification of complex k-point orbitals into real Γ-point
//!   supercell orbitals.
//! - [`qse`]: quantum subspace expansion for ground and excited states.
//! - [`diagnostics`]: ACSE residuals, error statistics and CSV output.
//! - [`experiment`]: single runs and scans tying the modules together.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod fci;
pub mod hamiltonian;
pub mod k2g;
pub mod linalg;
pub mod ops;
pub mod optimize;
pub mod qse;
pub mod state;
pub mod vqe;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Coefficients with magnitude below this are dropped from operator sums.
pub const PRUNE_TOL: f64 = 1e-14;
