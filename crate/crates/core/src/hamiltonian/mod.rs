//! Integrals, the PFCIDUMP format, Hamiltonian assembly and lattice models.

mod build;
mod integrals;
mod kmesh;
mod lattice;
mod pfcidump;

pub use build::{build_hamiltonian, build_qubit_hamiltonian};
pub(crate) use integrals::transform_two_body;
pub use integrals::{IntegralSet, ReferenceDeterminant, Tensor4};
pub use kmesh::KMesh;
pub use lattice::{build_ssh_hubbard, OrbitalBasis, SshHubbard};
pub(crate) use pfcidump::{fmt_real, parse_real};
pub use pfcidump::{load_pfcidump, read_pfcidump, write_pfcidump, write_pfcidump_to};

/// Hartree to kcal/mol.
pub const HARTREE_TO_KCALMOL: f64 = 627.5094740631;

pub fn hartree_to_kcalmol(x: f64) -> f64 {
    x * HARTREE_TO_KCALMOL
}
