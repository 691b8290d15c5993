//! Su–Schrieffer–Heeger chain with on-site Hubbard repulsion.
//!
//! Two sites per cell, intra-cell hopping `t1`, inter-cell hopping `t2`,
//! periodic boundary conditions over `ncell` cells and half filling. Sites
//! sit at fractional positions `∓1/4` about the cell centre; Bloch sums carry
//! these positions, so band orbitals at zone-boundary points come out with
//! complex phases just as a k-point mean-field code would produce.

use nalgebra::DMatrix;

use super::integrals::transform_two_body;
use super::{IntegralSet, KMesh, ReferenceDeterminant, Tensor4};
use crate::k2g::OrbitalSet;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitalBasis {
    /// Real-space sites (Γ point of the supercell).
    Site,
    /// Bloch band orbitals labelled by crystal momentum.
    Band,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshHubbard {
    pub ncell: usize,
    pub t1: f64,
    pub t2: f64,
    pub u: f64,
}

const SITE_POS: [f64; 2] = [-0.25, 0.25];

impl SshHubbard {
    pub fn new(ncell: usize, t1: f64, t2: f64, u: f64) -> Self {
        assert!(ncell >= 1, "ncell must be at least 1");
        Self { ncell, t1, t2, u }
    }

    pub fn nsite(&self) -> usize {
        2 * self.ncell
    }

    fn site(cell: usize, sub: usize) -> usize {
        2 * cell + sub
    }

    pub fn site_hopping(&self) -> DMatrix<C64> {
        let n = self.nsite();
        let mut h = DMatrix::<C64>::zeros(n, n);
        for c in 0..self.ncell {
            let a = Self::site(c, 0);
            let b = Self::site(c, 1);
            let a_next = Self::site((c + 1) % self.ncell, 0);
            for (i, j, t) in [(a, b, self.t1), (b, a_next, self.t2)] {
                h[(i, j)] -= C64::new(t, 0.0);
                h[(j, i)] -= C64::new(t, 0.0);
            }
        }
        h
    }

    fn site_two_body(&self) -> Tensor4 {
        let mut h2 = Tensor4::zeros(self.nsite());
        for i in 0..self.nsite() {
            h2.set(i, i, i, i, C64::new(self.u, 0.0));
        }
        h2
    }

    pub fn site_integrals(&self) -> IntegralSet {
        let n = self.nsite();
        IntegralSet {
            h1: self.site_hopping(),
            h2: self.site_two_body(),
            basis_label: format!("ssh-hubbard-site ncell={}", self.ncell),
            ..IntegralSet::zeros(n, n, 0)
        }
    }

    pub fn kmesh(&self) -> KMesh {
        KMesh::line(self.ncell)
    }

    /// Bloch band coefficients over sites (columns ordered `2·k + band`,
    /// lower band first), band energies and k labels.
    pub fn bands(&self) -> (DMatrix<C64>, Vec<f64>, Vec<usize>) {
        let n = self.nsite();
        let nk = self.ncell;
        let h = self.site_hopping();
        let mut coeffs = DMatrix::<C64>::zeros(n, n);
        let mut energies = Vec::with_capacity(n);
        let mut orb_k = Vec::with_capacity(n);
        let norm = 1.0 / (nk as f64).sqrt();
        for j in 0..nk {
            let kf = j as f64 / nk as f64;
            let mut bloch = DMatrix::<C64>::zeros(n, 2);
            for c in 0..nk {
                for s in 0..2 {
                    let phase = 2.0 * std::f64::consts::PI * kf * (c as f64 + SITE_POS[s]);
                    bloch[(Self::site(c, s), s)] = C64::from_polar(norm, phase);
                }
            }
            let hk = bloch.adjoint() * &h * &bloch;
            let off = hk[(0, 1)];
            let mag = off.norm();
            let diag = 0.5 * (hk[(0, 0)].re + hk[(1, 1)].re);
            let vecs: [[C64; 2]; 2] = if mag < 1e-14 {
                [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]]
            } else {
                let ph = off.conj() / mag;
                let r = std::f64::consts::FRAC_1_SQRT_2;
                [[C64::new(r, 0.0), -ph * r], [C64::new(r, 0.0), ph * r]]
            };
            for (band, (u, e)) in vecs.iter().zip([diag - mag, diag + mag]).enumerate() {
                let col = 2 * j + band;
                for site in 0..n {
                    coeffs[(site, col)] = bloch[(site, 0)] * u[0] + bloch[(site, 1)] * u[1];
                }
                energies.push(e);
                orb_k.push(j);
            }
        }
        (coeffs, energies, orb_k)
    }

    pub fn band_integrals(&self) -> IntegralSet {
        let n = self.nsite();
        let (c, _, orb_k) = self.bands();
        let mut ints = IntegralSet {
            h1: c.adjoint() * self.site_hopping() * &c,
            h2: transform_two_body(&self.site_two_body(), &c),
            kmesh: self.kmesh(),
            orb_k,
            basis_label: format!("ssh-hubbard-band ncell={}", self.ncell),
            ..IntegralSet::zeros(n, n, 0)
        };
        ints.enforce_momentum();
        ints
    }

    pub fn integrals(&self, basis: OrbitalBasis) -> IntegralSet {
        match basis {
            OrbitalBasis::Site => self.site_integrals(),
            OrbitalBasis::Band => self.band_integrals(),
        }
    }

    /// Band orbitals expressed over the (orthonormal) site basis of the
    /// supercell, with canonical mean-field orbital energies.
    pub fn band_orbitals(&self) -> OrbitalSet {
        let ints = self.band_integrals();
        let (c, _, orb_k) = self.bands();
        let reference = ReferenceDeterminant::aufbau(&ints).expect("half filling is valid");
        let energies = ints.fock_diagonal(
            &reference.occupied_spatial(crate::ops::Spin::Alpha),
            &reference.occupied_spatial(crate::ops::Spin::Beta),
        );
        OrbitalSet {
            coefficients: c,
            energies,
            overlap: DMatrix::identity(self.nsite(), self.nsite()),
            orb_k,
            kmesh: self.kmesh(),
        }
    }
}

pub fn build_ssh_hubbard(ncell: usize, t1: f64, t2: f64, u: f64, basis: OrbitalBasis) -> IntegralSet {
    SshHubbard::new(ncell, t1, t2, u).integrals(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_chain_dispersion() {
        let t = 0.7;
        let m = SshHubbard::new(4, t, t, 0.0);
        let ints = m.band_integrals();
        for p in 0..ints.norb {
            let k = ints.kmesh.point(ints.orb_k[p])[0];
            let expect = 2.0 * t * (std::f64::consts::PI * k).cos().abs();
            let sign = if p % 2 == 0 { -1.0 } else { 1.0 };
            assert!((ints.h1[(p, p)].re - sign * expect).abs() < 1e-12);
        }
    }

    #[test]
    fn band_coefficients_unitary() {
        let m = SshHubbard::new(3, 1.0, 0.6, 4.0);
        let (c, _, _) = m.bands();
        let d = c.adjoint() * &c - DMatrix::<C64>::identity(6, 6);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn band_integrals_satisfy_invariants() {
        for ncell in 1..=4 {
            let ints = SshHubbard::new(ncell, 1.0, 0.6, 4.0).band_integrals();
            ints.validate(1e-10).unwrap();
        }
    }

    #[test]
    fn zone_boundary_orbitals_are_complex() {
        let ints = SshHubbard::new(2, 1.0, 0.6, 4.0).band_integrals();
        assert!(ints.max_imag() > 0.1);
    }
}
