use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::ops::{FermionOperator, PauliSum};
use crate::{Error, Result, C64};

/// Rows per parallel task; fixed so output is independent of thread count.
const ROW_BLOCK: usize = 1024;

/// Operator in compressed sparse row form over the full `2^n` space.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    n_qubits: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<C64>,
}

/// Pauli strings sharing an X-mask: the Z-masks with phase-folded coefficients.
fn group_by_x(op: &PauliSum) -> Vec<(u64, Vec<(u64, C64)>)> {
    let mut groups: BTreeMap<u64, Vec<(u64, C64)>> = BTreeMap::new();
    for (p, c) in op.terms() {
        groups.entry(p.x).or_default().push((p.z, c * p.y_phase()));
    }
    groups.into_iter().collect()
}

impl SparseOperator {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn from_pauli(op: &PauliSum) -> Self {
        let n = op.n_qubits();
        assert!(n <= 30, "sparse operators limited to 30 qubits");
        let dim = 1usize << n;
        let groups = group_by_x(op);
        let rows: Vec<Vec<(u32, C64)>> = (0..dim)
            .into_par_iter()
            .with_min_len(ROW_BLOCK)
            .map(|r| {
                let mut row = Vec::with_capacity(groups.len());
                for (x, zs) in &groups {
                    let col = r as u64 ^ x;
                    let mut v = C64::new(0.0, 0.0);
                    for &(z, c) in zs {
                        if (z & col).count_ones().is_multiple_of(2) {
                            v += c;
                        } else {
                            v -= c;
                        }
                    }
                    if v.norm() >= crate::PRUNE_TOL {
                        row.push((col as u32, v));
                    }
                }
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        Self::from_rows(n, rows)
    }

    /// Direct action of a fermion operator on occupation bitstrings with
    /// Jordan–Wigner signs (qubit `j` ↔ bit `j`).
    pub fn from_fermion(op: &FermionOperator, n_qubits: usize) -> Result<Self> {
        if let Some(m) = op.max_mode() {
            if m >= n_qubits {
                return Err(Error::invalid(format!("mode {m} out of range for {n_qubits} qubits")));
            }
        }
        let dim = 1usize << n_qubits;
        let terms: Vec<(Vec<(usize, bool)>, C64)> = op.terms().map(|(t, c)| (t.to_vec(), c)).collect();
        let mut entries: Vec<(u32, u32, C64)> = Vec::new();
        for col in 0..dim as u64 {
            for (factors, c) in &terms {
                if let Some((row, sign)) = apply_ladders(factors, col) {
                    entries.push((row as u32, col as u32, c * sign));
                }
            }
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut rows: Vec<Vec<(u32, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in entries {
            let row = &mut rows[r as usize];
            match row.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => row.push((c, v)),
            }
        }
        for row in &mut rows {
            row.retain(|e| e.1.norm() >= crate::PRUNE_TOL);
        }
        Ok(Self::from_rows(n_qubits, rows))
    }

    fn from_rows(n_qubits: usize, rows: Vec<Vec<(u32, C64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n_qubits,
            row_ptr,
            cols,
            vals,
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let row = |r: usize| -> C64 {
            let mut s = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            s
        };
        if y.len() <= ROW_BLOCK {
            for (r, out) in y.iter_mut().enumerate() {
                *out = row(r);
            }
        } else {
            y.par_chunks_mut(ROW_BLOCK).enumerate().for_each(|(b, chunk)| {
                for (i, out) in chunk.iter_mut().enumerate() {
                    *out = row(b * ROW_BLOCK + i);
                }
            });
        }
    }

    /// Entry `⟨row|A|col⟩`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        (self.row_ptr[row]..self.row_ptr[row + 1])
            .find(|&k| self.cols[k] as usize == col)
            .map(|k| self.vals[k])
            .unwrap_or_default()
    }

    /// Iterates the stored entries `(col, value)` of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k] as usize, self.vals[k]))
    }

    /// Max-row-sum norm, an upper bound on the spectral norm of a Hermitian
    /// or anti-Hermitian operator.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|A + A†|` entry.
    pub fn anti_hermitian_deviation(&self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                d = d.max((v + self.entry(c, r).conj()).norm());
            }
        }
        d
    }
}

/// Applies ladder operators right to left to basis state `b`.
#[inline]
pub(crate) fn apply_ladders(factors: &[(usize, bool)], mut b: u64) -> Option<(u64, f64)> {
    let mut sign = 1.0;
    for &(m, dagger) in factors.iter().rev() {
        let bit = 1u64 << m;
        if dagger == (b & bit != 0) {
            return None;
        }
        if (b & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        b ^= bit;
    }
    Some((b, sign))
}
