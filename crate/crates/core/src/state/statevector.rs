use crate::hamiltonian::ReferenceDeterminant;
use crate::linalg;
use crate::ops::{FermionOperator, PauliSum};
use crate::{Error, Result, C64};

use super::sparse::apply_ladders;
use super::SparseOperator;

/// Normalized dense amplitude vector over `2^n_qubits` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

pub const NORM_TOL: f64 = 1e-10;

impl StateVector {
    pub fn basis(n_qubits: usize, index: u64) -> Self {
        assert!(n_qubits <= 30);
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index as usize] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Wraps amplitudes, rejecting vectors whose norm is not 1.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                actual: amps.len(),
            });
        }
        let nrm = linalg::norm(&amps);
        if (nrm - 1.0).abs() > NORM_TOL {
            return Err(Error::Numerical(format!("state norm {nrm} is not 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(n_qubits: usize, mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << n_qubits,
                actual: amps.len(),
            });
        }
        let nrm = linalg::norm(&amps);
        if nrm == 0.0 {
            return Err(Error::Numerical("cannot normalize the zero vector".into()));
        }
        linalg::scale(C64::new(1.0 / nrm, 0.0), &mut amps);
        Ok(Self { n_qubits, amps })
    }

    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> C64 {
        linalg::dot(&self.amps, &other.amps)
    }

    /// Largest imaginary component after removing the global phase that
    /// makes the largest amplitude real and positive.
    pub fn imag_residue(&self) -> f64 {
        let (_, big) = self
            .amps
            .iter()
            .enumerate()
            .fold((0, C64::new(0.0, 0.0)), |acc, (i, &a)| if a.norm() > acc.1.norm() { (i, a) } else { acc });
        if big.norm() == 0.0 {
            return 0.0;
        }
        let ph = big.conj() / big.norm();
        self.amps.iter().map(|a| (a * ph).im.abs()).fold(0.0, f64::max)
    }

    /// `⟨self|A|self⟩` for a compiled operator.
    pub fn expectation_sparse(&self, op: &SparseOperator) -> C64 {
        linalg::dot(&self.amps, &op.apply(&self.amps))
    }
}

/// Computational-basis state of the reference determinant.
pub fn prepare_reference(reference: &ReferenceDeterminant, n_qubits: usize) -> Result<StateVector> {
    if let Some(s) = reference.occupied.iter().find(|s| s.qubit() >= n_qubits) {
        return Err(Error::invalid(format!("qubit {} out of range", s.qubit())));
    }
    Ok(StateVector::basis(n_qubits, reference.bitstring()))
}

fn check_dims(op: &PauliSum, s: &StateVector) -> Result<()> {
    if op.n_qubits() != s.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: s.n_qubits(),
            actual: op.n_qubits(),
        });
    }
    Ok(())
}

/// Exact linear action `op|s⟩` (not renormalized).
pub fn apply(op: &PauliSum, s: &StateVector) -> Result<Vec<C64>> {
    check_dims(op, s)?;
    let mut out = vec![C64::new(0.0, 0.0); s.dim()];
    for (p, c) in op.terms() {
        for (b, a) in s.amplitudes().iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let (ph, t) = p.act(b as u64);
            out[t as usize] += c * ph * a;
        }
    }
    Ok(out)
}

/// Direct action of a fermion operator on the amplitudes (not renormalized).
pub fn apply_fermion(op: &FermionOperator, s: &StateVector) -> Result<Vec<C64>> {
    if let Some(m) = op.max_mode() {
        if m >= s.n_qubits() {
            return Err(Error::invalid(format!("mode {m} out of range for {} qubits", s.n_qubits())));
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); s.dim()];
    for (factors, c) in op.terms() {
        for (b, a) in s.amplitudes().iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            if let Some((t, sign)) = apply_ladders(factors, b as u64) {
                out[t as usize] += c * a * sign;
            }
        }
    }
    Ok(out)
}

/// `⟨s|op|s⟩`
pub fn expectation(op: &PauliSum, s: &StateVector) -> Result<C64> {
    check_dims(op, s)?;
    Ok(s.expectation_sparse(&SparseOperator::from_pauli(op)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{jordan_wigner, FermionOperator, PauliString};

    #[test]
    fn identity_and_z() {
        let s = StateVector::basis(3, 0);
        let id = PauliSum::identity(3, C64::new(1.0, 0.0));
        assert_eq!(apply(&id, &s).unwrap(), s.amplitudes());
        let z0 = PauliSum::single(3, PauliString::z(0), C64::new(1.0, 0.0));
        assert_eq!(apply(&z0, &s).unwrap(), s.amplitudes());
        assert_eq!(expectation(&z0, &s).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn annihilation_matches_dense_with_sign() {
        // a_0 on |011> (qubits 0 and 1 occupied) -> |010>, and a_1 -> -|001>.
        let s = StateVector::basis(3, 0b011);
        for (mode, target, sign) in [(0usize, 0b010usize, 1.0), (1, 0b001, -1.0)] {
            let img = jordan_wigner(&FermionOperator::term(&[(mode, false)], C64::new(1.0, 0.0)), 3).unwrap();
            let out = apply(&img, &s).unwrap();
            let dense = img.to_dense() * crate::linalg::to_dvector(s.amplitudes());
            for i in 0..8 {
                assert!((out[i] - dense[i]).norm() < 1e-14);
            }
            assert!((out[target] - C64::new(sign, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let s = StateVector::basis(2, 0);
        let op = PauliSum::identity(3, C64::new(1.0, 0.0));
        assert!(matches!(apply(&op, &s), Err(Error::DimensionMismatch { .. })));
    }
}
