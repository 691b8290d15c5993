use nalgebra::DMatrix;

use super::KMesh;
use crate::ops::{Occupancy, Spin, SpinOrbital};
use crate::{Error, Result, C64};

/// Dense rank-4 complex tensor indexed `[p][q][r][s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<C64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> C64 {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: C64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn iter_indexed(&self) -> impl Iterator<Item = ([usize; 4], C64)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().map(move |(i, &v)| {
            ([i / (n * n * n), (i / (n * n)) % n, (i / n) % n, i % n], v)
        })
    }
}

/// One- and two-electron integrals over restricted spatial orbitals.
///
/// `h2[p][q][r][s]` is `h^{pq}_{rs} = ∫∫ φp*(1) φq*(2) r12⁻¹ φr(2) φs(1)`,
/// contracted as `½ Σ h^{pq}_{rs} a†_p a†_q a_r a_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i32,
    pub kmesh: KMesh,
    pub orb_k: Vec<usize>,
    pub h1: DMatrix<C64>,
    pub h2: Tensor4,
    pub ecore: f64,
    pub basis_label: String,
}

impl IntegralSet {
    /// Empty integral set on a Γ-only mesh.
    pub fn zeros(norb: usize, nelec: usize, ms2: i32) -> Self {
        Self {
            norb,
            nelec,
            ms2,
            kmesh: KMesh::gamma(),
            orb_k: vec![0; norb],
            h1: DMatrix::zeros(norb, norb),
            h2: Tensor4::zeros(norb),
            ecore: 0.0,
            basis_label: String::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.norb
    }

    pub fn n_alpha(&self) -> usize {
        ((self.nelec as i64 + self.ms2 as i64) / 2) as usize
    }

    pub fn n_beta(&self) -> usize {
        ((self.nelec as i64 - self.ms2 as i64) / 2) as usize
    }

    pub fn h2_conserves(&self, p: usize, q: usize, r: usize, s: usize) -> bool {
        let k = &self.orb_k;
        self.kmesh.conserves(&[k[p], k[q]], &[k[r], k[s]])
    }

    pub fn h1_conserves(&self, p: usize, q: usize) -> bool {
        self.kmesh.conserves(&[self.orb_k[p]], &[self.orb_k[q]])
    }

    /// Largest deviation from `h1 = h1†` and `h^{pq}_{rs} = conj(h^{sr}_{qp})`.
    pub fn hermiticity_deviation(&self) -> (f64, f64) {
        let n = self.norb;
        let mut d1: f64 = 0.0;
        for p in 0..n {
            for q in 0..n {
                d1 = d1.max((self.h1[(p, q)] - self.h1[(q, p)].conj()).norm());
            }
        }
        let mut d2: f64 = 0.0;
        for ([p, q, r, s], v) in self.h2.iter_indexed() {
            d2 = d2.max((v - self.h2.get(s, r, q, p).conj()).norm());
        }
        (d1, d2)
    }

    /// Checks structural consistency, Hermiticity (within `herm_tol`) and
    /// that momentum-violating entries vanish.
    pub fn validate(&self, herm_tol: f64) -> Result<()> {
        let n = self.norb;
        if self.h1.nrows() != n || self.h1.ncols() != n || self.h2.dim() != n {
            return Err(Error::invalid("integral dimensions disagree with NORB"));
        }
        if self.orb_k.len() != n {
            return Err(Error::invalid("orbital k-assignment length differs from NORB"));
        }
        if let Some(&k) = self.orb_k.iter().find(|&&k| k >= self.kmesh.nkpt()) {
            return Err(Error::invalid(format!("k index {} out of range", k + 1)));
        }
        if self.nelec > 2 * n {
            return Err(Error::invalid("more electrons than spin orbitals"));
        }
        if (self.nelec as i64 + self.ms2 as i64) % 2 != 0 || self.ms2.unsigned_abs() as usize > self.nelec {
            return Err(Error::invalid("MS2 inconsistent with NELEC"));
        }
        if self.n_alpha() > n || self.n_beta() > n {
            return Err(Error::invalid("spin occupation exceeds orbital count"));
        }
        for p in 0..n {
            for q in 0..n {
                if self.h1[(p, q)].norm() > 0.0 && !self.h1_conserves(p, q) {
                    return Err(Error::MomentumViolation {
                        what: format!("h1({},{})", p + 1, q + 1),
                    });
                }
            }
        }
        for ([p, q, r, s], v) in self.h2.iter_indexed() {
            if v.norm() > 0.0 && !self.h2_conserves(p, q, r, s) {
                return Err(Error::MomentumViolation {
                    what: format!("h2({},{},{},{})", p + 1, q + 1, r + 1, s + 1),
                });
            }
        }
        let (d1, d2) = self.hermiticity_deviation();
        if d1 > herm_tol {
            return Err(Error::NotHermitian {
                what: "one-body integrals".into(),
                deviation: d1,
            });
        }
        if d2 > herm_tol {
            return Err(Error::NotHermitian {
                what: "two-body integrals".into(),
                deviation: d2,
            });
        }
        Ok(())
    }

    /// Sets every momentum-violating entry to exactly zero.
    pub fn enforce_momentum(&mut self) {
        let n = self.norb;
        for p in 0..n {
            for q in 0..n {
                if !self.h1_conserves(p, q) {
                    self.h1[(p, q)] = C64::new(0.0, 0.0);
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        if !self.h2_conserves(p, q, r, s) {
                            self.h2.set(p, q, r, s, C64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }
    }

    /// Largest imaginary part among all integrals.
    pub fn max_imag(&self) -> f64 {
        let a = self.h1.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        let b = self.h2.as_slice().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        a.max(b)
    }

    /// Spin-averaged Fock diagonal for the given per-spin spatial occupations.
    pub fn fock_diagonal(&self, occ_alpha: &[usize], occ_beta: &[usize]) -> Vec<f64> {
        (0..self.norb)
            .map(|p| {
                let mut f = self.h1[(p, p)].re;
                // Coulomb h^{pi}_{ip} minus half the exchange h^{pi}_{pi}
                for &i in occ_alpha.iter().chain(occ_beta) {
                    f += self.h2.get(p, i, i, p).re - 0.5 * self.h2.get(p, i, p, i).re;
                }
                f
            })
            .collect()
    }
}

/// Occupied spin orbitals of a single-determinant reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDeterminant {
    pub occupied: Vec<SpinOrbital>,
    pub total_momentum: [f64; 3],
}

impl ReferenceDeterminant {
    /// Reference with the given per-spin spatial occupations.
    pub fn from_occupations(
        ints: &IntegralSet,
        occ_alpha: &[usize],
        occ_beta: &[usize],
    ) -> Result<Self> {
        if occ_alpha.len() != ints.n_alpha() || occ_beta.len() != ints.n_beta() {
            return Err(Error::invalid(format!(
                "reference needs {} alpha and {} beta electrons",
                ints.n_alpha(),
                ints.n_beta()
            )));
        }
        let mut occupied = Vec::with_capacity(ints.nelec);
        let mut ks = Vec::new();
        for (occ, spin) in [(occ_alpha, Spin::Alpha), (occ_beta, Spin::Beta)] {
            let mut seen = vec![false; ints.norb];
            for &p in occ {
                if p >= ints.norb || seen[p] {
                    return Err(Error::invalid(format!("bad occupied orbital {p}")));
                }
                seen[p] = true;
                occupied.push(SpinOrbital {
                    spatial: p,
                    spin,
                    k_index: ints.orb_k[p],
                    occ: Occupancy::Occupied,
                });
                ks.push(ints.orb_k[p]);
            }
        }
        occupied.sort_by_key(|s| s.qubit());
        let total = ints.kmesh.transfer(&ks, &[]);
        let total_momentum = total.map(|c| {
            let w = c.rem_euclid(1.0);
            if 1.0 - w < 1e-8 {
                0.0
            } else {
                w
            }
        });
        Ok(Self {
            occupied,
            total_momentum,
        })
    }

    /// Aufbau filling by the self-consistent spin-averaged Fock diagonal.
    ///
    /// For canonical Hartree–Fock orbitals the Fock diagonal equals the
    /// orbital energies, so this recovers the Hartree–Fock determinant.
    pub fn aufbau(ints: &IntegralSet) -> Result<Self> {
        let (na, nb) = (ints.n_alpha(), ints.n_beta());
        let pick = |f: &[f64], n: usize| -> Vec<usize> {
            let mut idx: Vec<usize> = (0..ints.norb).collect();
            idx.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
            let mut v = idx[..n].to_vec();
            v.sort_unstable();
            v
        };
        let h: Vec<f64> = (0..ints.norb).map(|p| ints.h1[(p, p)].re).collect();
        let (mut oa, mut ob) = (pick(&h, na), pick(&h, nb));
        for _ in 0..50 {
            let f = ints.fock_diagonal(&oa, &ob);
            let (na_new, nb_new) = (pick(&f, na), pick(&f, nb));
            if na_new == oa && nb_new == ob {
                break;
            }
            oa = na_new;
            ob = nb_new;
        }
        Self::from_occupations(ints, &oa, &ob)
    }

    pub fn nelec(&self) -> usize {
        self.occupied.len()
    }

    /// Computational-basis index of the determinant.
    pub fn bitstring(&self) -> u64 {
        self.occupied.iter().fold(0u64, |b, s| b | (1 << s.qubit()))
    }

    pub fn is_occupied(&self, spatial: usize, spin: Spin) -> bool {
        self.occupied
            .iter()
            .any(|s| s.spatial == spatial && s.spin == spin)
    }

    /// Spatial orbitals occupied in both spins (closed-shell part).
    pub fn doubly_occupied(&self, norb: usize) -> Vec<usize> {
        (0..norb)
            .filter(|&p| self.is_occupied(p, Spin::Alpha) && self.is_occupied(p, Spin::Beta))
            .collect()
    }

    pub fn occupied_spatial(&self, spin: Spin) -> Vec<usize> {
        self.occupied
            .iter()
            .filter(|s| s.spin == spin)
            .map(|s| s.spatial)
            .collect()
    }

    /// Energy of the determinant evaluated directly from the integrals.
    pub fn energy(&self, ints: &IntegralSet) -> f64 {
        let oa = self.occupied_spatial(Spin::Alpha);
        let ob = self.occupied_spatial(Spin::Beta);
        let mut e = C64::new(ints.ecore, 0.0);
        for &i in oa.iter().chain(&ob) {
            e += ints.h1[(i, i)];
        }
        // ½ Σ_{ij} (J_ij − δ_σσ' K_ij) over occupied spin orbitals
        let spins = [&oa, &ob];
        for (si, a) in spins.iter().enumerate() {
            for (sj, b) in spins.iter().enumerate() {
                for &i in a.iter() {
                    for &j in b.iter() {
                        e += 0.5 * ints.h2.get(i, j, j, i);
                        if si == sj {
                            e -= 0.5 * ints.h2.get(i, j, i, j);
                        }
                    }
                }
            }
        }
        e.re
    }
}

/// `h'^{ij}_{kl} = Σ conj(U_pi) conj(U_qj) U_rk U_sl h^{pq}_{rs}` by four
/// quarter transformations.
pub(crate) fn transform_two_body(h2: &Tensor4, u: &DMatrix<C64>) -> Tensor4 {
    let n = h2.dim();
    assert_eq!(u.nrows(), n);
    assert_eq!(u.ncols(), n);
    let uc = u.map(|c| c.conj());
    let mut a = Tensor4::zeros(n);
    let mut b = Tensor4::zeros(n);
    // index 0 (conjugated)
    for i in 0..n {
        for p in 0..n {
            let c = uc[(p, i)];
            if c.norm() == 0.0 {
                continue;
            }
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = a.get(i, q, r, s) + c * h2.get(p, q, r, s);
                        a.set(i, q, r, s, v);
                    }
                }
            }
        }
    }
    // index 1 (conjugated)
    for j in 0..n {
        for q in 0..n {
            let c = uc[(q, j)];
            if c.norm() == 0.0 {
                continue;
            }
            for i in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = b.get(i, j, r, s) + c * a.get(i, q, r, s);
                        b.set(i, j, r, s, v);
                    }
                }
            }
        }
    }
    a.as_mut_slice().fill(C64::new(0.0, 0.0));
    // index 2
    for k in 0..n {
        for r in 0..n {
            let c = u[(r, k)];
            if c.norm() == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    for s in 0..n {
                        let v = a.get(i, j, k, s) + c * b.get(i, j, r, s);
                        a.set(i, j, k, s, v);
                    }
                }
            }
        }
    }
    b.as_mut_slice().fill(C64::new(0.0, 0.0));
    // index 3
    for l in 0..n {
        for s in 0..n {
            let c = u[(s, l)];
            if c.norm() == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let v = b.get(i, j, k, l) + c * a.get(i, j, k, s);
                        b.set(i, j, k, l, v);
                    }
                }
            }
        }
    }
    b
}
