use crate::linalg;
use crate::ops::PauliSum;
use crate::{Error, Result, C64};

use super::{SparseOperator, StateVector};

/// Hermitian qubit operator compiled for repeated application.
#[derive(Debug, Clone)]
pub struct Observable {
    pauli: PauliSum,
    sparse: SparseOperator,
}

impl Observable {
    pub fn new(pauli: PauliSum) -> Result<Self> {
        let deviation = pauli.terms().map(|(_, c)| c.im.abs()).fold(0.0, f64::max);
        if deviation > 1e-10 {
            return Err(Error::NotHermitian {
                what: "observable".into(),
                deviation,
            });
        }
        let sparse = SparseOperator::from_pauli(&pauli);
        Ok(Self { pauli, sparse })
    }

    pub fn n_qubits(&self) -> usize {
        self.pauli.n_qubits()
    }

    pub fn pauli(&self) -> &PauliSum {
        &self.pauli
    }

    pub fn sparse(&self) -> &SparseOperator {
        &self.sparse
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.sparse.apply(v)
    }

    /// Real part of `⟨s|O|s⟩`.
    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        if s.n_qubits() != self.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits(),
                actual: s.n_qubits(),
            });
        }
        Ok(linalg::dot(s.amplitudes(), &self.apply(s.amplitudes())).re)
    }
}
