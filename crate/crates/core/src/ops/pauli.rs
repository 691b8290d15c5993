use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::{C64, PRUNE_TOL};

/// Tensor product of single-qubit Paulis in symplectic form.
///
/// Qubit `j` carries `X` if only bit `j` of `x` is set, `Z` if only bit `j`
/// of `z` is set and `Y` if both are.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

const I_POW: [C64; 4] = [
    C64 { re: 1.0, im: 0.0 },
    C64 { re: 0.0, im: 1.0 },
    C64 { re: -1.0, im: 0.0 },
    C64 { re: 0.0, im: -1.0 },
];

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn x(q: usize) -> Self {
        Self { x: 1 << q, z: 0 }
    }

    pub fn y(q: usize) -> Self {
        Self {
            x: 1 << q,
            z: 1 << q,
        }
    }

    pub fn z(q: usize) -> Self {
        Self { x: 0, z: 1 << q }
    }

    /// Parses a label such as `"X0 Y1 Z3"`; an empty string is the identity.
    pub fn parse(label: &str) -> Option<Self> {
        let mut out = Self::IDENTITY;
        for tok in label.split_whitespace() {
            let (letter, idx) = tok.split_at(1);
            let q: usize = idx.parse().ok()?;
            let bit = 1u64 << q;
            match letter {
                "I" => {}
                "X" => out.x |= bit,
                "Y" => {
                    out.x |= bit;
                    out.z |= bit
                }
                "Z" => out.z |= bit,
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Highest qubit acted on non-trivially.
    pub fn support_max(&self) -> Option<usize> {
        let m = self.x | self.z;
        (m != 0).then(|| 63 - m.leading_zeros() as usize)
    }

    /// `self * other = phase * result`.
    pub fn multiply(&self, other: &PauliString) -> (C64, PauliString) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let e = (self.x & self.z).count_ones() as i64 + (other.x & other.z).count_ones() as i64
            + 2 * (self.z & other.x).count_ones() as i64
            - (x & z).count_ones() as i64;
        (I_POW[e.rem_euclid(4) as usize], PauliString { x, z })
    }

    /// Action on a computational basis state: `P|b> = phase |b ^ x>`.
    #[inline]
    pub fn act(&self, b: u64) -> (C64, u64) {
        let e = (self.x & self.z).count_ones() + 2 * (self.z & b).count_ones();
        (I_POW[(e % 4) as usize], b ^ self.x)
    }

    /// `i^{|x&z|}`, the phase converting `X^x Z^z` into this string.
    #[inline]
    pub(crate) fn y_phase(&self) -> C64 {
        I_POW[((self.x & self.z).count_ones() % 4) as usize]
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in 0..64 {
            let (xb, zb) = ((self.x >> q) & 1, (self.z >> q) & 1);
            let letter = match (xb, zb) {
                (0, 0) => continue,
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            };
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{letter}{q}")?;
        }
        Ok(())
    }
}

/// Complex-weighted sum of Pauli strings on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, C64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "at most 64 qubits are supported");
        Self {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: C64) -> Self {
        Self::single(n_qubits, PauliString::IDENTITY, coeff)
    }

    pub fn single(n_qubits: usize, p: PauliString, coeff: C64) -> Self {
        let mut out = Self::zero(n_qubits);
        out.add_term(p, coeff);
        out.prune();
        out
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> C64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, p: PauliString, c: C64) {
        *self.terms.entry(p).or_default() += c;
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
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
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = v.conj();
        }
        out
    }

    /// Hermitian iff every coefficient is real (Pauli strings are Hermitian).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_deviation() <= tol
    }

    pub(crate) fn anti_hermitian_deviation(&self) -> f64 {
        self.terms.values().map(|c| c.re.abs()).fold(0.0, f64::max)
    }

    /// Sum of coefficient magnitudes; an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs_diff(&self, other: &PauliSum) -> f64 {
        (self - other).terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Dense `2^n x 2^n` matrix; basis index bit `j` is the occupation of qubit `j`.
    pub fn to_dense(&self) -> DMatrix<C64> {
        assert!(self.n_qubits <= 14, "dense matrices limited to 14 qubits");
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            for b in 0..dim as u64 {
                let (ph, out) = p.act(b);
                m[(out as usize, b as usize)] += c * ph;
            }
        }
        m
    }
}

impl Add for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.n_qubits = out.n_qubits.max(rhs.n_qubits);
        for (p, c) in &rhs.terms {
            out.add_term(*p, *c);
        }
        out.prune();
        out
    }
}

impl Sub for &PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: &PauliSum) -> PauliSum {
        let mut out = self.clone();
        out.n_qubits = out.n_qubits.max(rhs.n_qubits);
        for (p, c) in &rhs.terms {
            out.add_term(*p, -*c);
        }
        out.prune();
        out
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits.max(rhs.n_qubits));
        for (pa, ca) in &self.terms {
            for (pb, cb) in &rhs.terms {
                let (ph, p) = pa.multiply(pb);
                out.add_term(p, ca * cb * ph);
            }
        }
        out.prune();
        out
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "({:+.10}{:+.10}i) [{}]", c.re, c.im, p)?;
        }
        Ok(())
    }
}
