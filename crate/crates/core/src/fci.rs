//! Exact diagonalization restricted to a particle-number / S_z sector.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::hamiltonian::{build_qubit_hamiltonian, IntegralSet};
use crate::linalg;
use crate::ops::PauliSum;
use crate::state::StateVector;
use crate::{Error, Result, C64};

/// Sector dimension up to which the full sector matrix is diagonalized.
pub const DENSE_LIMIT: usize = 4096;
/// Residual norm at which the iterative solver stops.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `(nelec, ms2)`
    pub sector: (usize, i32),
}

/// Basis indices with `nelec` electrons and the given `2 S_z`, ascending.
///
/// Even qubits carry alpha electrons, odd qubits beta electrons.
pub fn sector_basis(n_qubits: usize, nelec: usize, ms2: i32) -> Result<Vec<u64>> {
    let twice_na = nelec as i64 + ms2 as i64;
    if twice_na < 0 || twice_na % 2 != 0 || twice_na / 2 > nelec as i64 {
        return Err(Error::invalid(format!("no sector with nelec={nelec}, ms2={ms2}")));
    }
    if n_qubits > 30 {
        return Err(Error::Unsupported(format!("{n_qubits} qubits exceeds the statevector limit")));
    }
    let na = (twice_na / 2) as u32;
    let nb = nelec as u32 - na;
    let alpha_mask = (0..n_qubits).step_by(2).fold(0u64, |m, q| m | (1 << q));
    let basis: Vec<u64> = (0..1u64 << n_qubits)
        .filter(|b| (b & alpha_mask).count_ones() == na && (b & !alpha_mask).count_ones() == nb)
        .collect();
    if basis.is_empty() {
        return Err(Error::invalid(format!(
            "sector nelec={nelec}, ms2={ms2} is empty on {n_qubits} qubits"
        )));
    }
    Ok(basis)
}

/// Hermitian operator restricted to a sector, stored row-wise.
struct SectorMatrix {
    rows: Vec<Vec<(u32, C64)>>,
}

impl SectorMatrix {
    fn new(op: &PauliSum, basis: &[u64]) -> Self {
        let index: BTreeMap<u64, u32> = basis.iter().enumerate().map(|(i, &b)| (b, i as u32)).collect();
        let mut groups: BTreeMap<u64, Vec<(u64, C64)>> = BTreeMap::new();
        for (p, c) in op.terms() {
            groups.entry(p.x).or_default().push((p.z, c * p.y_phase()));
        }
        let rows = basis
            .par_iter()
            .map(|&r| {
                let mut row = Vec::new();
                for (x, zs) in &groups {
                    let col = r ^ x;
                    let Some(&ci) = index.get(&col) else { continue };
                    let mut v = C64::new(0.0, 0.0);
                    for &(z, c) in zs {
                        if (z & col).count_ones() % 2 == 0 {
                            v += c;
                        } else {
                            v -= c;
                        }
                    }
                    if v.norm() >= crate::PRUNE_TOL {
                        row.push((ci, v));
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        Self { rows }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.rows
            .par_iter()
            .with_min_len(256)
            .map(|row| row.iter().map(|&(c, v)| v * x[c as usize]).sum())
            .collect()
    }

    fn diagonal(&self) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .find(|e| e.0 as usize == i)
                    .map(|e| e.1.re)
                    .unwrap_or(0.0)
            })
            .collect()
    }

    fn dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j as usize)] = v;
            }
        }
        m
    }
}

/// Lowest `n_states` eigenpairs of `h` in the `(nelec, ms2)` sector.
pub fn fci(h: &PauliSum, sector: (usize, i32), n_states: usize) -> Result<SpectrumResult> {
    fci_with_limit(h, sector, n_states, DENSE_LIMIT)
}

/// As [`fci`], switching to the iterative solver above `dense_limit`.
pub fn fci_with_limit(
    h: &PauliSum,
    sector: (usize, i32),
    n_states: usize,
    dense_limit: usize,
) -> Result<SpectrumResult> {
    if !h.is_hermitian(1e-10) {
        return Err(Error::NotHermitian {
            what: "qubit Hamiltonian".into(),
            deviation: h.terms().map(|(_, c)| c.im.abs()).fold(0.0, f64::max),
        });
    }
    if n_states == 0 {
        return Err(Error::invalid("n_states must be at least 1"));
    }
    let n = h.n_qubits();
    let basis = sector_basis(n, sector.0, sector.1)?;
    let mut n_states = n_states;
    if n_states > basis.len() {
        log::warn!(
            "requested {n_states} states but the sector has dimension {}; truncating",
            basis.len()
        );
        n_states = basis.len();
    }
    let m = SectorMatrix::new(h, &basis);
    let (energies, vectors) = if m.dim() <= dense_limit {
        dense_solve(&m, n_states)
    } else {
        davidson(&m, n_states)?
    };
    let states = vectors
        .into_iter()
        .map(|v| {
            let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
            for (&b, a) in basis.iter().zip(v) {
                amps[b as usize] = a;
            }
            StateVector::normalized(n, amps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        energies,
        states,
        sector,
    })
}

/// FCI on the Hamiltonian of an integral set in its own electron sector.
pub fn fci_integrals(ints: &IntegralSet, n_states: usize) -> Result<SpectrumResult> {
    let h = build_qubit_hamiltonian(ints)?;
    fci(&h, (ints.nelec, ints.ms2), n_states)
}

fn dense_solve(m: &SectorMatrix, n_states: usize) -> (Vec<f64>, Vec<Vec<C64>>) {
    let d = m.dense();
    let (vals, vecs) = if d.iter().all(|z| z.im == 0.0) {
        let (vals, vecs) = linalg::eigh_real(&d.map(|z| z.re));
        (vals, vecs.map(|x| C64::new(x, 0.0)))
    } else {
        linalg::eigh(&d)
    };
    let states = (0..n_states)
        .map(|i| vecs.column(i).iter().copied().collect())
        .collect();
    (vals[..n_states].to_vec(), states)
}

fn orthonormalize_against(v: &mut [C64], basis: &[Vec<C64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = linalg::dot(b, v);
            linalg::axpy(-c, b, v);
        }
    }
    let n = linalg::norm(v);
    if n > 0.0 {
        linalg::scale(C64::new(1.0 / n, 0.0), v);
    }
    n
}

/// Block Davidson with a diagonal preconditioner and thick restarts.
fn davidson(m: &SectorMatrix, n_states: usize) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let dim = m.dim();
    let diag = m.diagonal();
    let block = (n_states + 2).min(dim);
    let max_space = (8 * block).max(40).min(dim);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut images: Vec<Vec<C64>> = Vec::new();
    // Unit guesses on the lowest diagonal entries, each mixed with a small
    // deterministic generic vector so no symmetry sector is missed.
    for (g, &i) in order[..block].iter().enumerate() {
        let mut v: Vec<C64> = (0..dim)
            .map(|j| {
                let x = ((j * (block + 1) + g) as f64 * 0.618_033_988_749_895).fract();
                C64::new(1e-2 * (x - 0.5), 0.0)
            })
            .collect();
        v[i] += C64::new(1.0, 0.0);
        if orthonormalize_against(&mut v, &basis) > 1e-10 {
            images.push(m.apply(&v));
            basis.push(v);
        }
    }

    for _ in 0..2000 {
        let k = basis.len();
        let mut t = DMatrix::<C64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = linalg::dot(&basis[i], &images[j]);
                t[(i, j)] = v;
                t[(j, i)] = v.conj();
            }
        }
        let (theta, y) = linalg::eigh(&t);
        let ritz = |cols: &[Vec<C64>], i: usize| -> Vec<C64> {
            let mut out = vec![C64::new(0.0, 0.0); dim];
            for (j, c) in cols.iter().enumerate() {
                linalg::axpy(y[(j, i)], c, &mut out);
            }
            out
        };
        let mut corrections = Vec::new();
        let mut converged = true;
        for (i, &ti) in theta.iter().enumerate().take(n_states) {
            let x = ritz(&basis, i);
            let mut r = ritz(&images, i);
            linalg::axpy(C64::new(-ti, 0.0), &x, &mut r);
            if linalg::norm(&r) > RESIDUAL_TOL {
                converged = false;
                for (rj, dj) in r.iter_mut().zip(&diag) {
                    let mut den = ti - dj;
                    if den.abs() < 1e-8 {
                        den = 1e-8f64.copysign(den);
                    }
                    *rj /= den;
                }
                corrections.push(r);
            }
        }
        if converged {
            let vecs = (0..n_states).map(|i| ritz(&basis, i)).collect();
            return Ok((theta[..n_states].to_vec(), vecs));
        }
        if k + corrections.len() > max_space {
            let keep = block.min(k);
            let new_basis: Vec<Vec<C64>> = (0..keep).map(|i| ritz(&basis, i)).collect();
            let new_images: Vec<Vec<C64>> = (0..keep).map(|i| ritz(&images, i)).collect();
            basis = new_basis;
            images = new_images;
        }
        let mut added = 0;
        for mut c in corrections {
            if orthonormalize_against(&mut c, &basis) > 1e-10 {
                images.push(m.apply(&c));
                basis.push(c);
                added += 1;
            }
        }
        if added == 0 {
            return Err(Error::Numerical("Davidson subspace stagnated".into()));
        }
    }
    Err(Error::Numerical("Davidson solver did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_ssh_hubbard, OrbitalBasis};

    #[test]
    fn hubbard_dimer_ground_energy() {
        let ints = build_ssh_hubbard(1, 1.0, 0.0, 4.0, OrbitalBasis::Site);
        let r = fci_integrals(&ints, 1).unwrap();
        assert!((r.energies[0] - (2.0 - 8f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn sector_sizes() {
        assert_eq!(sector_basis(8, 4, 0).unwrap().len(), 36);
        assert_eq!(sector_basis(4, 1, 1).unwrap().len(), 2);
        assert!(sector_basis(4, 2, 1).is_err());
    }

    #[test]
    fn iterative_matches_dense() {
        let ints = build_ssh_hubbard(2, 1.0, 0.6, 4.0, OrbitalBasis::Band);
        let h = build_qubit_hamiltonian(&ints).unwrap();
        let a = fci(&h, (4, 0), 3).unwrap();
        let b = fci_with_limit(&h, (4, 0), 3, 0).unwrap();
        for i in 0..3 {
            assert!((a.energies[i] - b.energies[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn too_many_states_truncated() {
        let ints = build_ssh_hubbard(1, 1.0, 0.0, 4.0, OrbitalBasis::Site);
        let h = build_qubit_hamiltonian(&ints).unwrap();
        assert_eq!(fci(&h, (2, 0), 10).unwrap().energies.len(), 4);
    }
}
