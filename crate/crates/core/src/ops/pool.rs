use std::fmt;

use crate::hamiltonian::{IntegralSet, KMesh, ReferenceDeterminant};
use crate::state::Generator;
use crate::{Error, Result, C64};

use super::fermion::{mode_index, FermionOperator, Ladder, Spin};
use super::jw::jordan_wigner;
use super::pauli::PauliSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExcitationRank {
    Single,
    Double,
}

/// Index range of a pool: occupied→virtual only, or general indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolKind {
    SD,
    GSD,
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoolKind::SD => write!(f, "sd"),
            PoolKind::GSD => write!(f, "gsd"),
        }
    }
}

impl std::str::FromStr for PoolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sd" => Ok(PoolKind::SD),
            "gsd" => Ok(PoolKind::GSD),
            other => Err(Error::invalid(format!("unknown pool kind '{other}' (expected sd or gsd)"))),
        }
    }
}

/// One anti-Hermitian, spin-adapted, momentum-conserving pool operator.
#[derive(Debug, Clone)]
pub struct PoolGenerator {
    pub id: usize,
    pub tau: FermionOperator,
    pub pauli: PauliSum,
    pub generator: Generator,
    pub rank: ExcitationRank,
    pub momentum_transfer: [f64; 3],
    /// Spatial orbitals `[p, q]` (single, `p ← q`) or `[p, q, r, s]`
    /// (double, `p q → r s`).
    pub spatial: Vec<usize>,
    pub label: String,
}

/// `T − T†` in normal-ordered form.
pub fn anti_hermitian(t: &FermionOperator) -> FermionOperator {
    t - &t.adjoint()
}

/// Whether a product of ladder operators with the given k-point indices
/// conserves crystal momentum (net transfer is a reciprocal lattice vector).
pub fn momentum_conserved(factors: &[(usize, bool)], kmesh: &KMesh) -> bool {
    let cre: Vec<usize> = factors.iter().filter(|f| f.1).map(|f| f.0).collect();
    let ann: Vec<usize> = factors.iter().filter(|f| !f.1).map(|f| f.0).collect();
    kmesh.conserves(&cre, &ann)
}

fn wrap(t: [f64; 3]) -> [f64; 3] {
    t.map(|c| {
        let w = c.rem_euclid(1.0);
        if w < 1e-8 || 1.0 - w < 1e-8 {
            0.0
        } else {
            w
        }
    })
}

struct Candidate {
    rank: ExcitationRank,
    spatial: Vec<usize>,
    label: &'static str,
    tau: FermionOperator,
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(a†_pα a_qα + a†_pβ a_qβ) − h.c.`
fn singlet_single(p: usize, q: usize) -> FermionOperator {
    let mut t = FermionOperator::zero();
    for spin in [Spin::Alpha, Spin::Beta] {
        t.add_product(&[(mode_index(p, spin), true), (mode_index(q, spin), false)], real(1.0));
    }
    anti_hermitian(&t)
}

/// The two singlet-coupled double excitations moving electrons from `p, q`
/// into `r, s`, labelled by the spin coupling of the excited pair.
fn singlet_doubles(p: usize, q: usize, r: usize, s: usize) -> [(&'static str, FermionOperator); 2] {
    let (pa, pb) = (mode_index(p, Spin::Alpha), mode_index(p, Spin::Beta));
    let (qa, qb) = (mode_index(q, Spin::Alpha), mode_index(q, Spin::Beta));
    let (ra, rb) = (mode_index(r, Spin::Alpha), mode_index(r, Spin::Beta));
    let (sa, sb) = (mode_index(s, Spin::Alpha), mode_index(s, Spin::Beta));
    let ex = |t: &mut FermionOperator, c1: usize, a1: usize, c2: usize, a2: usize, w: f64| {
        t.add_product(&[(c1, true), (a1, false), (c2, true), (a2, false)], real(w));
    };
    let mut triplet = FermionOperator::zero();
    let two = 2.0 / 12f64.sqrt();
    let one = 1.0 / 12f64.sqrt();
    ex(&mut triplet, ra, pa, sa, qa, two);
    ex(&mut triplet, rb, pb, sb, qb, two);
    ex(&mut triplet, ra, pa, sb, qb, one);
    ex(&mut triplet, rb, pb, sa, qa, one);
    ex(&mut triplet, ra, pb, sb, qa, one);
    ex(&mut triplet, rb, pa, sa, qb, one);
    let mut singlet = FermionOperator::zero();
    ex(&mut singlet, ra, pa, sb, qb, 0.5);
    ex(&mut singlet, rb, pb, sa, qa, 0.5);
    ex(&mut singlet, ra, pb, sb, qa, -0.5);
    ex(&mut singlet, rb, pa, sa, qb, -0.5);
    [
        ("triplet-pair", anti_hermitian(&triplet)),
        ("singlet-pair", anti_hermitian(&singlet)),
    ]
}

fn normalized(op: FermionOperator) -> Option<FermionOperator> {
    if op.many_body_order() == 0 {
        return None;
    }
    let n = op.coeff_norm();
    Some(op.scale(real(1.0 / n)))
}

/// Builds the spin-adapted, momentum-filtered SD or GSD pool.
///
/// Singles are `(a†_pα a_qα + a†_pβ a_qβ) − h.c.` for `p ≤ q`
/// (SD: `p` virtual, `q` occupied). Doubles take each pair `p ≤ q`,
/// `r ≤ s` (GSD: `(p,q) ≤ (r,s)` in pair order; SD: `p,q` occupied and
/// `r,s` virtual) and emit the two singlet couplings of the excited pair.
/// Every operator is normalized to unit coefficient norm; zero operators
/// and momentum-violating index sets are dropped.
pub fn build_pool(
    ints: &IntegralSet,
    kind: PoolKind,
    reference: &ReferenceDeterminant,
) -> Result<Vec<PoolGenerator>> {
    let n = ints.norb;
    let k = |p: usize| ints.orb_k[p];
    let conserves = |cre: &[usize], ann: &[usize]| {
        let f: Vec<(usize, bool)> = cre
            .iter()
            .map(|&p| (k(p), true))
            .chain(ann.iter().map(|&p| (k(p), false)))
            .collect();
        momentum_conserved(&f, &ints.kmesh)
    };

    let mut cands: Vec<Candidate> = Vec::new();
    match kind {
        PoolKind::GSD => {
            for p in 0..n {
                for q in p..n {
                    if conserves(&[p], &[q]) {
                        cands.push(Candidate {
                            rank: ExcitationRank::Single,
                            spatial: vec![p, q],
                            label: "singlet",
                            tau: singlet_single(p, q),
                        });
                    }
                }
            }
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p..n).map(move |q| (p, q))).collect();
            for (i, &(p, q)) in pairs.iter().enumerate() {
                for &(r, s) in &pairs[i..] {
                    if !conserves(&[r, s], &[p, q]) {
                        continue;
                    }
                    for (label, tau) in singlet_doubles(p, q, r, s) {
                        cands.push(Candidate {
                            rank: ExcitationRank::Double,
                            spatial: vec![p, q, r, s],
                            label,
                            tau,
                        });
                    }
                }
            }
        }
        PoolKind::SD => {
            if ints.ms2 != 0 {
                return Err(Error::Unsupported(
                    "occupied-virtual pools need a closed-shell reference".into(),
                ));
            }
            let occ = reference.doubly_occupied(n);
            let virt: Vec<usize> = (0..n).filter(|p| !occ.contains(p)).collect();
            for &i in &occ {
                for &a in &virt {
                    if conserves(&[a], &[i]) {
                        cands.push(Candidate {
                            rank: ExcitationRank::Single,
                            spatial: vec![a, i],
                            label: "singlet",
                            tau: singlet_single(a, i),
                        });
                    }
                }
            }
            for (x, &i) in occ.iter().enumerate() {
                for &j in &occ[x..] {
                    for (y, &a) in virt.iter().enumerate() {
                        for &b in &virt[y..] {
                            if !conserves(&[a, b], &[i, j]) {
                                continue;
                            }
                            for (label, tau) in singlet_doubles(i, j, a, b) {
                                cands.push(Candidate {
                                    rank: ExcitationRank::Double,
                                    spatial: vec![i, j, a, b],
                                    label,
                                    tau,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    cands.sort_by(|a, b| {
        (a.rank, &a.spatial, a.label).cmp(&(b.rank, &b.spatial, b.label))
    });

    let n_qubits = ints.n_qubits();
    let mut pool: Vec<PoolGenerator> = Vec::with_capacity(cands.len());
    for c in cands {
        let Some(tau) = normalized(c.tau) else { continue };
        if pool.iter().any(|g| g.tau == tau) {
            continue;
        }
        let pauli = jordan_wigner(&tau, n_qubits)?;
        let generator = Generator::new(&pauli)?;
        let (cre, ann): (Vec<usize>, Vec<usize>) = match c.rank {
            ExcitationRank::Single => (vec![k(c.spatial[0])], vec![k(c.spatial[1])]),
            ExcitationRank::Double => (
                vec![k(c.spatial[2]), k(c.spatial[3])],
                vec![k(c.spatial[0]), k(c.spatial[1])],
            ),
        };
        pool.push(PoolGenerator {
            id: pool.len(),
            tau,
            pauli,
            generator,
            rank: c.rank,
            momentum_transfer: wrap(ints.kmesh.transfer(&cre, &ann)),
            spatial: c.spatial,
            label: c.label.to_string(),
        });
    }
    if pool.is_empty() {
        log::warn!("{kind} pool is empty for this system");
    }
    Ok(pool)
}

impl PoolGenerator {
    /// Ladder factors of every term, for momentum checks on raw operators.
    pub fn factors(&self) -> Vec<Vec<Ladder>> {
        self.tau.terms().map(|(t, _)| t.to_vec()).collect()
    }

    pub fn name(&self) -> String {
        let idx: Vec<String> = self.spatial.iter().map(|p| p.to_string()).collect();
        format!("{}[{}]", self.label, idx.join(","))
    }
}
