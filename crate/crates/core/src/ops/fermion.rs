use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{C64, PRUNE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spin {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occupancy {
    Occupied,
    Virtual,
}

/// A spin orbital of a (possibly k-resolved) orbital basis.
///
/// Qubits are interleaved by spin: spatial orbital `p` maps to qubit `2p`
/// (alpha) and `2p + 1` (beta).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinOrbital {
    pub spatial: usize,
    pub spin: Spin,
    pub k_index: usize,
    pub occ: Occupancy,
}

impl SpinOrbital {
    pub fn qubit(&self) -> usize {
        mode_index(self.spatial, self.spin)
    }
}

pub(crate) fn mode_index(spatial: usize, spin: Spin) -> usize {
    2 * spatial
        + match spin {
            Spin::Alpha => 0,
            Spin::Beta => 1,
        }
}

/// A single ladder operator: `(mode, dagger)`.
pub type Ladder = (usize, bool);

/// Complex-weighted sum of products of fermionic ladder operators.
///
/// Terms are always held in normal order (creations left of annihilations,
/// each group sorted by descending mode index) with negligible coefficients
/// pruned, so structural equality is operator equality.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    terms: BTreeMap<Vec<Ladder>, C64>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(coeff: C64) -> Self {
        Self::term(&[], coeff)
    }

    /// Builds `coeff * factors[0] factors[1] ...`, normal ordering the product.
    pub fn term(factors: &[Ladder], coeff: C64) -> Self {
        let mut terms = BTreeMap::new();
        normal_order_into(factors.to_vec(), coeff, &mut terms);
        let mut op = Self { terms };
        op.prune();
        op
    }

    /// `a†_p a_q`
    pub fn one_body(p: usize, q: usize) -> Self {
        Self::term(&[(p, true), (q, false)], C64::new(1.0, 0.0))
    }

    /// `a†_p a†_q a_r a_s`
    pub fn two_body(p: usize, q: usize, r: usize, s: usize) -> Self {
        Self::term(
            &[(p, true), (q, true), (r, false), (s, false)],
            C64::new(1.0, 0.0),
        )
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], C64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest mode index referenced, if any.
    pub fn max_mode(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|t| t.iter().map(|&(m, _)| m))
            .max()
    }

    /// Highest number of ladder operators in any term.
    pub fn many_body_order(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.prune();
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (t, c) in &self.terms {
            let rev: Vec<Ladder> = t.iter().rev().map(|&(m, d)| (m, !d)).collect();
            normal_order_into(rev, c.conj(), &mut terms);
        }
        let mut op = Self { terms };
        op.prune();
        op
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.adjoint()).max_abs_coeff() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        (self + &self.adjoint()).max_abs_coeff() <= tol
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Whether every term has equal numbers of creations and annihilations
    /// in each spin sector (i.e. commutes with N and S_z).
    pub fn conserves_number_and_sz(&self) -> bool {
        self.terms.keys().all(|t| {
            let mut n = [0i64; 2];
            for &(m, d) in t {
                n[m % 2] += if d { 1 } else { -1 };
            }
            n == [0, 0]
        })
    }

    /// Adds `coeff * factors[0] factors[1] ...` in place.
    pub fn add_product(&mut self, factors: &[Ladder], coeff: C64) {
        let mut tmp = BTreeMap::new();
        normal_order_into(factors.to_vec(), coeff, &mut tmp);
        for (t, c) in tmp {
            match self.terms.entry(t) {
                Entry::Occupied(mut o) => {
                    *o.get_mut() += c;
                    if o.get().norm() < PRUNE_TOL {
                        o.remove();
                    }
                }
                Entry::Vacant(v) => {
                    if c.norm() >= PRUNE_TOL {
                        v.insert(c);
                    }
                }
            }
        }
    }

    fn add_term(&mut self, t: &[Ladder], c: C64) {
        *self.terms.entry(t.to_vec()).or_insert(C64::new(0.0, 0.0)) += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }
}

/// Normal orders `coeff * term` and accumulates the result into `out`.
///
/// Adjacent pairs are swapped bubble-sort style; `a_p a†_p` contractions spawn
/// the shorter term recursively.
fn normal_order_into(mut term: Vec<Ladder>, mut coeff: C64, out: &mut BTreeMap<Vec<Ladder>, C64>) {
    for i in 1..term.len() {
        for j in (1..=i).rev() {
            let right = term[j];
            let left = term[j - 1];
            if right.1 && !left.1 {
                term.swap(j - 1, j);
                coeff = -coeff;
                if right.0 == left.0 {
                    let mut reduced = term[..j - 1].to_vec();
                    reduced.extend_from_slice(&term[j + 1..]);
                    normal_order_into(reduced, -coeff, out);
                }
            } else if right.1 == left.1 {
                if right.0 == left.0 {
                    return;
                } else if right.0 > left.0 {
                    term.swap(j - 1, j);
                    coeff = -coeff;
                }
            }
        }
    }
    *out.entry(term).or_insert(C64::new(0.0, 0.0)) += coeff;
}

impl std::ops::AddAssign<&FermionOperator> for FermionOperator {
    fn add_assign(&mut self, rhs: &FermionOperator) {
        for (t, c) in &rhs.terms {
            self.add_term(t, *c);
        }
        self.prune();
    }
}

impl Add for &FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: &FermionOperator) -> FermionOperator {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t, *c);
        }
        out.prune();
        out
    }
}

impl Sub for &FermionOperator {
    type Output = FermionOperator;
    fn sub(self, rhs: &FermionOperator) -> FermionOperator {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t, -*c);
        }
        out.prune();
        out
    }
}

impl Mul for &FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: &FermionOperator) -> FermionOperator {
        let mut terms = BTreeMap::new();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &rhs.terms {
                let mut t = ta.clone();
                t.extend_from_slice(tb);
                normal_order_into(t, ca * cb, &mut terms);
            }
        }
        let mut op = FermionOperator { terms };
        op.prune();
        op
    }
}

impl Neg for &FermionOperator {
    type Output = FermionOperator;
    fn neg(self) -> FermionOperator {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Add for FermionOperator {
    type Output = FermionOperator;
    fn add(self, rhs: FermionOperator) -> FermionOperator {
        &self + &rhs
    }
}

impl Sub for FermionOperator {
    type Output = FermionOperator;
    fn sub(self, rhs: FermionOperator) -> FermionOperator {
        &self - &rhs
    }
}

impl Mul for FermionOperator {
    type Output = FermionOperator;
    fn mul(self, rhs: FermionOperator) -> FermionOperator {
        &self * &rhs
    }
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:+.6}{:+.6}i)", c.re, c.im)?;
            for &(m, d) in t {
                write!(f, " {}{}", m, if d { "^" } else { "" })?;
            }
        }
        Ok(())
    }
}
