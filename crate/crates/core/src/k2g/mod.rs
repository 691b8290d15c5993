//! Realification of complex k-point orbitals into real Γ-point supercell
//! orbitals, and the matching rotation of the integrals.

mod dump;

pub use dump::{load_supercell_dump, read_supercell_dump, write_supercell_dump, write_supercell_dump_to};

use nalgebra::DMatrix;

use crate::hamiltonian::{transform_two_body, IntegralSet, KMesh};
use crate::linalg;
use crate::{Error, Result, C64};

/// Orthonormality, projector and realness checks.
pub const K2G_TOL: f64 = 1e-8;
/// Imaginary parts of rotated integrals up to this are truncated to zero.
pub const TRUNCATE_TOL: f64 = 1e-10;
/// Orbital energies closer than this are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-8;

/// Mean-field orbitals over a supercell basis, labelled by k-point.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalSet {
    /// Basis functions × orbitals.
    pub coefficients: DMatrix<C64>,
    pub energies: Vec<f64>,
    pub overlap: DMatrix<C64>,
    pub orb_k: Vec<usize>,
    pub kmesh: KMesh,
}

impl OrbitalSet {
    pub fn n_basis(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn n_orbitals(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Largest deviation of `C† S C` from the identity.
    pub fn orthonormality_deviation(&self) -> f64 {
        let g = self.coefficients.adjoint() * &self.overlap * &self.coefficients;
        let mut d: f64 = 0.0;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let t = if i == j { 1.0 } else { 0.0 };
                d = d.max((g[(i, j)] - C64::new(t, 0.0)).norm());
            }
        }
        d
    }

    fn validate(&self) -> Result<()> {
        let (nb, no) = (self.n_basis(), self.n_orbitals());
        if self.overlap.shape() != (nb, nb) {
            return Err(Error::DimensionMismatch {
                expected: nb,
                actual: self.overlap.nrows(),
            });
        }
        if self.energies.len() != no || self.orb_k.len() != no {
            return Err(Error::DimensionMismatch {
                expected: no,
                actual: self.energies.len().min(self.orb_k.len()),
            });
        }
        if let Some(&k) = self.orb_k.iter().find(|&&k| k >= self.kmesh.nkpt()) {
            return Err(Error::invalid(format!("orbital k index {k} out of range")));
        }
        let d = self.orthonormality_deviation();
        if d > K2G_TOL {
            return Err(Error::Numerical(format!("orbitals are not orthonormal (deviation {d:.3e})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RealificationResult {
    /// Real orbitals over the supercell basis, ascending in energy.
    pub coefficients: DMatrix<f64>,
    pub energies: Vec<f64>,
    /// `C̃† S C`: rotation from the complex to the real orbitals.
    pub rotation: DMatrix<C64>,
    /// Largest imaginary part of the Fock matrix in the real orbital basis.
    pub fock_imag_residue: f64,
    /// Largest change of the per-k-pair span projector.
    pub projector_deviation: f64,
}

/// Orbital indices grouped into `{k, −k}` orbits, in order of first appearance.
fn k_orbits(orbitals: &OrbitalSet) -> Result<Vec<Vec<usize>>> {
    let mesh = &orbitals.kmesh;
    let mut seen = vec![false; mesh.nkpt()];
    let mut orbits = Vec::new();
    for &k in &orbitals.orb_k {
        if seen[k] {
            continue;
        }
        let partner = mesh
            .negation_partner(k)
            .ok_or_else(|| Error::invalid(format!("k-point {k} has no -k partner in the mesh")))?;
        seen[k] = true;
        seen[partner] = true;
        let cols: Vec<usize> = (0..orbitals.n_orbitals())
            .filter(|&j| orbitals.orb_k[j] == k || orbitals.orb_k[j] == partner)
            .collect();
        orbits.push(cols);
    }
    Ok(orbits)
}

/// Multiplies `v` by `conj(z)/|z|` of its largest-magnitude entry.
fn fix_phase(v: &mut [C64]) {
    let big = v.iter().fold(C64::new(0.0, 0.0), |b, &x| if x.norm() > b.norm() { x } else { b });
    if big.norm() > 0.0 {
        let ph = big.conj() / big.norm();
        v.iter_mut().for_each(|x| *x *= ph);
    }
}

fn s_dot(a: &[f64], s: &DMatrix<f64>, b: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += s[(i, j)] * b[j];
        }
        acc += a[i] * row;
    }
    acc
}

/// Ordered Gram–Schmidt in the S metric, skipping dependent candidates.
fn orthonormal_subset(cands: &[Vec<f64>], s: &DMatrix<f64>, want: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in cands {
        if out.len() == want {
            break;
        }
        let scale = s_dot(c, s, c).sqrt();
        if scale < 1e-12 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for o in &out {
                let p = s_dot(o, s, &v);
                v.iter_mut().zip(o).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = s_dot(&v, s, &v).sqrt();
        if n > 1e-6 * scale {
            v.iter_mut().for_each(|x| *x /= n);
            out.push(v);
        }
    }
    out
}

/// Flips each column so its first significant coefficient is positive.
fn fix_sign(v: &mut [f64]) {
    if let Some(&x) = v.iter().find(|x| x.abs() > 1e-8) {
        if x < 0.0 {
            v.iter_mut().for_each(|y| *y = -*y);
        }
    }
}

/// Real orthonormal orbitals spanning the same space as the k-point
/// orbitals, diagonalizing the supercell Fock matrix `S C̃ E C̃† S`.
///
/// Each `{k, −k}` orbit is treated separately: its columns (phase-fixed
/// for self-paired points) are split into real and imaginary parts, an
/// orthonormal real basis of their span is taken and the Fock matrix is
/// diagonalized within it. Degenerate eigenvectors are fixed by projecting
/// the real candidates onto the degenerate subspace in order. The lowest
/// `n_occupied` orbitals must not mix with virtual ones.
pub fn realify(orbitals: &OrbitalSet, n_occupied: usize) -> Result<RealificationResult> {
    orbitals.validate()?;
    if !orbitals.kmesh.is_negation_closed() {
        return Err(Error::invalid("k-mesh is not closed under k -> -k"));
    }
    let nb = orbitals.n_basis();
    let no = orbitals.n_orbitals();
    if n_occupied > no {
        return Err(Error::invalid(format!("{n_occupied} occupied orbitals out of {no}")));
    }
    let s_imag = orbitals.overlap.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if s_imag > TRUNCATE_TOL {
        return Err(Error::invalid("the supercell overlap must be real"));
    }
    let s = orbitals.overlap.map(|z| z.re);
    let c = &orbitals.coefficients;
    let e = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        no,
        orbitals.energies.iter().map(|&x| C64::new(x, 0.0)),
    ));
    let sc = &orbitals.overlap * c;
    let fock = &sc * e * sc.adjoint();

    let mut columns: Vec<(f64, Vec<f64>)> = Vec::with_capacity(no);
    let mut fock_imag: f64 = 0.0;
    let mut proj_dev: f64 = 0.0;
    for orbit in k_orbits(orbitals)? {
        let self_paired = orbit.iter().all(|&j| orbitals.orb_k[j] == orbitals.orb_k[orbit[0]]);
        let mut cands = Vec::with_capacity(2 * orbit.len());
        for &j in &orbit {
            let mut v: Vec<C64> = c.column(j).iter().copied().collect();
            if self_paired {
                fix_phase(&mut v);
            }
            let sq = std::f64::consts::SQRT_2;
            cands.push(v.iter().map(|z| sq * z.re).collect::<Vec<f64>>());
            cands.push(v.iter().map(|z| sq * z.im).collect::<Vec<f64>>());
        }
        let basis = orthonormal_subset(&cands, &s, orbit.len());
        if basis.len() != orbit.len() {
            return Err(Error::Numerical(format!(
                "real parts of the orbitals at k-point {} span only {} of {} dimensions",
                orbitals.orb_k[orbit[0]],
                basis.len(),
                orbit.len()
            )));
        }
        let m = orbit.len();
        let v = DMatrix::from_fn(nb, m, |i, j| basis[j][i]);
        let vc = v.map(|x| C64::new(x, 0.0));
        let cs = DMatrix::from_fn(nb, m, |i, j| c[(i, orbit[j])]);
        let dp = &cs * cs.adjoint() - &vc * vc.adjoint();
        proj_dev = proj_dev.max(dp.iter().map(|z| z.norm()).fold(0.0, f64::max));

        let fsub = vc.adjoint() * &fock * &vc;
        fock_imag = fock_imag.max(fsub.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
        let (w, y) = linalg::eigh_real(&fsub.map(|z| z.re));
        let mut y = y;
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && (w[end] - w[start]).abs() < DEGENERACY_TOL {
                end += 1;
            }
            if end - start > 1 {
                let q = y.columns(start, end - start).into_owned();
                let proj = &q * q.transpose();
                let units: Vec<Vec<f64>> = (0..m)
                    .map(|i| proj.column(i).iter().copied().collect())
                    .collect();
                let ident = DMatrix::<f64>::identity(m, m);
                let picked = orthonormal_subset(&units, &ident, end - start);
                for (g, col) in picked.iter().enumerate() {
                    y.set_column(start + g, &nalgebra::DVector::from_column_slice(col));
                }
            }
            start = end;
        }
        let orbs = &v * &y;
        for (j, &wj) in w.iter().enumerate().take(m) {
            let mut col: Vec<f64> = orbs.column(j).iter().copied().collect();
            fix_sign(&mut col);
            columns.push((wj, col));
        }
    }
    if proj_dev > K2G_TOL {
        return Err(Error::Numerical(format!(
            "realified orbitals change the k-pair spans (deviation {proj_dev:.3e})"
        )));
    }
    if fock_imag > K2G_TOL {
        return Err(Error::Numerical(format!(
            "Fock matrix keeps imaginary parts up to {fock_imag:.3e} in the real basis"
        )));
    }
    columns.sort_by(|a, b| a.0.total_cmp(&b.0));
    let coefficients = DMatrix::from_fn(nb, no, |i, j| columns[j].1[i]);
    let energies: Vec<f64> = columns.iter().map(|c| c.0).collect();
    let rotation = c.adjoint() * &orbitals.overlap * coefficients.map(|x| C64::new(x, 0.0));

    let mut occ_order: Vec<usize> = (0..no).collect();
    occ_order.sort_by(|&a, &b| orbitals.energies[a].total_cmp(&orbitals.energies[b]).then(a.cmp(&b)));
    let leak = occ_order[n_occupied..]
        .iter()
        .flat_map(|&p| (0..n_occupied).map(move |j| (p, j)))
        .map(|(p, j)| rotation[(p, j)].norm())
        .fold(0.0, f64::max);
    if n_occupied > 0 && n_occupied < no {
        let homo = orbitals.energies[occ_order[n_occupied - 1]];
        let lumo = orbitals.energies[occ_order[n_occupied]];
        if lumo - homo < DEGENERACY_TOL {
            log::warn!("degenerate mean-field gap (HOMO {homo:.6}, LUMO {lumo:.6}); the aufbau reference is ambiguous");
        }
    }
    if leak > K2G_TOL {
        return Err(Error::Numerical(format!(
            "realification would mix occupied and virtual orbitals (overlap {leak:.3e}); \
             the mean-field gap is degenerate"
        )));
    }
    Ok(RealificationResult {
        coefficients,
        energies,
        rotation,
        fock_imag_residue: fock_imag,
        projector_deviation: proj_dev,
    })
}

#[derive(Debug, Clone)]
pub struct RotatedIntegrals {
    pub integrals: IntegralSet,
    /// Largest imaginary part of the rotated integrals before truncation.
    pub max_imag_residue: f64,
    /// Whether imaginary parts were small enough to be dropped.
    pub truncated: bool,
}

/// `h' = U† h U` and the matching four-index transformation.
///
/// The k labels survive only if every rotated orbital stays at a single
/// k-point; otherwise the result lives on the Γ point of the supercell.
pub fn rotate_integrals(ints: &IntegralSet, u: &DMatrix<C64>) -> Result<RotatedIntegrals> {
    let n = ints.norb;
    if u.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: u.nrows(),
        });
    }
    let dev = linalg::unitarity_deviation(u);
    if dev > K2G_TOL {
        return Err(Error::Numerical(format!("rotation is not unitary (deviation {dev:.3e})")));
    }
    let mut out = ints.clone();
    out.h1 = u.adjoint() * &ints.h1 * u;
    out.h2 = transform_two_body(&ints.h2, u);

    let new_k: Option<Vec<usize>> = (0..n)
        .map(|j| {
            let mut ks = (0..n).filter(|&p| u[(p, j)].norm() > 1e-10).map(|p| ints.orb_k[p]);
            let first = ks.next().unwrap_or(0);
            ks.all(|k| k == first).then_some(first)
        })
        .collect();
    match new_k {
        Some(k) => out.orb_k = k,
        None => {
            out.kmesh = KMesh::gamma();
            out.orb_k = vec![0; n];
        }
    }
    out.enforce_momentum();

    let max_imag_residue = out.max_imag();
    let truncated = max_imag_residue <= TRUNCATE_TOL;
    if truncated {
        out.h1.iter_mut().for_each(|z| z.im = 0.0);
        out.h2.as_mut_slice().iter_mut().for_each(|z| z.im = 0.0);
    }
    out.validate(TRUNCATE_TOL)?;
    Ok(RotatedIntegrals {
        integrals: out,
        max_imag_residue,
        truncated,
    })
}
