//! Quantum subspace expansion: the Hamiltonian projected onto excitation
//! images `T_u|ψ⟩` of a reference state, solved as a generalized
//! eigenproblem.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::fci::sector_basis;
use crate::hamiltonian::{IntegralSet, ReferenceDeterminant};
use crate::linalg;
use crate::ops::{momentum_conserved, FermionOperator, Ladder};
use crate::state::{apply_fermion, Observable, StateVector};
use crate::{Error, Result, C64};

/// Default canonical-orthogonalization threshold.
pub const OVERLAP_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QseTruncation {
    /// Occupied→virtual singles and doubles.
    SD,
    /// Singles and doubles over general indices.
    FullSD,
    /// One excitation from the reference to every determinant of its sector.
    SectorComplete,
}

impl std::str::FromStr for QseTruncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sd" => Ok(Self::SD),
            "full-sd" | "fullsd" | "gsd" => Ok(Self::FullSD),
            "sector" | "sector-complete" => Ok(Self::SectorComplete),
            other => Err(Error::invalid(format!(
                "unknown QSE truncation '{other}' (expected sd, full-sd or sector)"
            ))),
        }
    }
}

/// Expansion operators; the identity is always first.
#[derive(Debug, Clone)]
pub struct QseSpace {
    operators: Vec<FermionOperator>,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

impl QseSpace {
    /// Wraps operators, prepending the identity unless it is already first.
    pub fn from_operators(ops: Vec<FermionOperator>) -> Self {
        let id = FermionOperator::identity(one());
        let mut operators = Vec::with_capacity(ops.len() + 1);
        if ops.first() != Some(&id) {
            operators.push(id);
        }
        operators.extend(ops);
        Self { operators }
    }

    pub fn build(ints: &IntegralSet, reference: &ReferenceDeterminant, truncation: QseTruncation) -> Result<Self> {
        let nq = ints.n_qubits();
        let occupied: Vec<usize> = reference.occupied.iter().map(|s| s.qubit()).collect();
        let virt: Vec<usize> = (0..nq).filter(|q| !occupied.contains(q)).collect();
        let all: Vec<usize> = (0..nq).collect();
        let k = |q: usize| ints.orb_k[q / 2];
        let allowed = |cre: &[usize], ann: &[usize]| -> bool {
            let spin = |qs: &[usize]| qs.iter().filter(|&&q| q % 2 == 1).count();
            if spin(cre) != spin(ann) {
                return false;
            }
            let f: Vec<(usize, bool)> = cre
                .iter()
                .map(|&q| (k(q), true))
                .chain(ann.iter().map(|&q| (k(q), false)))
                .collect();
            momentum_conserved(&f, &ints.kmesh)
        };
        let excitation = |cre: &[usize], ann: &[usize]| -> FermionOperator {
            let f: Vec<Ladder> = cre
                .iter()
                .map(|&q| (q, true))
                .chain(ann.iter().map(|&q| (q, false)))
                .collect();
            FermionOperator::term(&f, one())
        };
        let pairs = |v: &[usize]| -> Vec<[usize; 2]> {
            let mut out = Vec::new();
            for (i, &a) in v.iter().enumerate() {
                for &b in &v[i + 1..] {
                    out.push([a, b]);
                }
            }
            out
        };
        let mut ops = Vec::new();
        match truncation {
            QseTruncation::SD | QseTruncation::FullSD => {
                let (from, to) = if truncation == QseTruncation::SD {
                    (&occupied, &virt)
                } else {
                    (&all, &all)
                };
                for &i in from {
                    for &a in to {
                        if a != i && allowed(&[a], &[i]) {
                            ops.push(excitation(&[a], &[i]));
                        }
                    }
                }
                for ij in pairs(from) {
                    for ab in pairs(to) {
                        if ab != ij && allowed(&ab, &ij) {
                            ops.push(excitation(&ab, &ij));
                        }
                    }
                }
            }
            QseTruncation::SectorComplete => {
                let refbits = reference.bitstring();
                for d in sector_basis(nq, ints.nelec, ints.ms2)? {
                    if d == refbits {
                        continue;
                    }
                    let cre: Vec<usize> = (0..nq).filter(|q| d >> q & 1 == 1 && refbits >> q & 1 == 0).collect();
                    let ann: Vec<usize> = (0..nq).filter(|q| d >> q & 1 == 0 && refbits >> q & 1 == 1).collect();
                    ops.push(excitation(&cre, &ann));
                }
            }
        }
        Ok(Self::from_operators(ops))
    }

    pub fn operators(&self) -> &[FermionOperator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct QseResult {
    pub h_qse: DMatrix<C64>,
    pub s_qse: DMatrix<C64>,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Expansion coefficients over the operators, one per energy.
    pub coefficients: Vec<DVector<C64>>,
    /// Dimension kept by canonical orthogonalization.
    pub retained: usize,
}

/// `H[u][v] = ⟨T_u ψ|H|T_v ψ⟩` and `S[u][v] = ⟨T_u ψ|T_v ψ⟩`.
pub fn qse_matrices(
    reference: &StateVector,
    h: &Observable,
    space: &QseSpace,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if reference.n_qubits() != h.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: h.n_qubits(),
            actual: reference.n_qubits(),
        });
    }
    let images: Vec<Vec<C64>> = space
        .operators
        .par_iter()
        .map(|t| apply_fermion(t, reference))
        .collect::<Result<_>>()?;
    let h_images: Vec<Vec<C64>> = images.par_iter().map(|w| h.apply(w)).collect();
    let n = images.len();
    let entries: Vec<(C64, C64)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (u, v) = (idx / n, idx % n);
            (linalg::dot(&images[u], &h_images[v]), linalg::dot(&images[u], &images[v]))
        })
        .collect();
    let hq = DMatrix::from_fn(n, n, |u, v| entries[u * n + v].0);
    let sq = DMatrix::from_fn(n, n, |u, v| entries[u * n + v].1);
    Ok((hq, sq))
}

/// Largest `|A − A†|` entry.
pub fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Generalized eigenproblem `H c = E S c` by canonical orthogonalization:
/// overlap eigenvectors with eigenvalue below `threshold` are dropped.
pub fn solve_pencil(h: &DMatrix<C64>, s: &DMatrix<C64>, threshold: f64) -> Result<QseResult> {
    let n = h.nrows();
    if h.shape() != (n, n) || s.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: s.nrows(),
        });
    }
    let (sval, svec) = linalg::eigh(s);
    let keep: Vec<usize> = (0..n).filter(|&i| sval[i] >= threshold).collect();
    if keep.is_empty() {
        return Err(Error::Numerical("QSE overlap has no eigenvalue above the threshold".into()));
    }
    let x = DMatrix::from_fn(n, keep.len(), |i, j| svec[(i, keep[j])] / sval[keep[j]].sqrt());
    let hr = x.adjoint() * h * &x;
    let (energies, y) = linalg::eigh(&hr);
    let c = &x * y;
    let coefficients = (0..keep.len()).map(|j| c.column(j).into_owned()).collect();
    Ok(QseResult {
        h_qse: h.clone(),
        s_qse: s.clone(),
        energies,
        coefficients,
        retained: keep.len(),
    })
}

/// The lowest `n` states of a pencil solution.
pub fn excited_states(result: &QseResult, n: usize) -> Result<Vec<(f64, DVector<C64>)>> {
    if n > result.retained {
        return Err(Error::invalid(format!(
            "{n} states requested but only {} retained",
            result.retained
        )));
    }
    Ok((0..n)
        .map(|i| (result.energies[i], result.coefficients[i].clone()))
        .collect())
}

/// Matrices and pencil solution in one call.
pub fn qse(reference: &StateVector, h: &Observable, space: &QseSpace, threshold: f64) -> Result<QseResult> {
    let (hq, sq) = qse_matrices(reference, h, space)?;
    solve_pencil(&hq, &sq, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fci::fci_integrals;
    use crate::hamiltonian::{build_qubit_hamiltonian, build_ssh_hubbard, OrbitalBasis};
    use crate::state::prepare_reference;

    fn setup(ncell: usize) -> (IntegralSet, ReferenceDeterminant, Observable, StateVector) {
        let ints = build_ssh_hubbard(ncell, 1.0, 0.6, 4.0, OrbitalBasis::Band);
        let r = ReferenceDeterminant::aufbau(&ints).unwrap();
        let h = Observable::new(build_qubit_hamiltonian(&ints).unwrap()).unwrap();
        let psi = prepare_reference(&r, ints.n_qubits()).unwrap();
        (ints, r, h, psi)
    }

    #[test]
    fn identity_space_gives_reference_energy() {
        let (_, _, h, psi) = setup(2);
        let (hq, sq) = qse_matrices(&psi, &h, &QseSpace::from_operators(vec![])).unwrap();
        assert_eq!(hq.shape(), (1, 1));
        assert!((hq[(0, 0)].re - h.expectation(&psi).unwrap()).abs() < 1e-12);
        assert!((sq[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sector_complete_space_reproduces_fci() {
        let (ints, r, h, psi) = setup(2);
        let space = QseSpace::build(&ints, &r, QseTruncation::SectorComplete).unwrap();
        assert_eq!(space.len(), 36);
        let res = qse(&psi, &h, &space, OVERLAP_THRESHOLD).unwrap();
        let f = fci_integrals(&ints, 36).unwrap();
        for (a, b) in res.energies.iter().zip(&f.energies) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn duplicated_vector_is_dropped() {
        let (ints, r, h, psi) = setup(1);
        let space = QseSpace::build(&ints, &r, QseTruncation::SD).unwrap();
        let base = qse(&psi, &h, &space, OVERLAP_THRESHOLD).unwrap();
        let mut ops = space.operators().to_vec();
        ops.push(ops[1].clone());
        let dup = qse(&psi, &h, &QseSpace::from_operators(ops), OVERLAP_THRESHOLD).unwrap();
        assert_eq!(dup.retained, base.retained);
        for (a, b) in base.energies.iter().zip(&dup.energies) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_overlap_is_plain_eigenproblem() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]).map(|x| C64::new(x, 0.0));
        let s = DMatrix::<C64>::identity(2, 2);
        let r = solve_pencil(&h, &s, OVERLAP_THRESHOLD).unwrap();
        let e = 1.25f64.sqrt();
        assert!((r.energies[0] + e).abs() < 1e-12 && (r.energies[1] - e).abs() < 1e-12);
        assert_eq!(excited_states(&r, 1).unwrap().len(), 1);
        assert!(excited_states(&r, 3).is_err());
    }
}
