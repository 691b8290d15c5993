//! Small dense linear-algebra helpers and deterministic reductions.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::C64;

/// Fixed reduction block; partial sums are formed per block and combined in
/// block order, so results do not depend on the thread count.
const BLOCK: usize = 2048;

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    let block = |(x, y): (&[C64], &[C64])| -> C64 {
        x.iter().zip(y).fold(C64::new(0.0, 0.0), |s, (p, q)| s + p.conj() * q)
    };
    if a.len() <= BLOCK {
        return block((a, b));
    }
    let partial: Vec<C64> = a
        .par_chunks(BLOCK)
        .zip(b.par_chunks(BLOCK))
        .map(block)
        .collect();
    partial.iter().fold(C64::new(0.0, 0.0), |s, p| s + p)
}

pub fn norm(a: &[C64]) -> f64 {
    dot(a, a).re.max(0.0).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    if y.len() <= BLOCK {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += alpha * xi;
        }
    } else {
        y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
    }
}

pub fn scale(alpha: C64, x: &mut [C64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigen-decomposition of a real symmetric matrix with ascending eigenvalues.
pub fn eigh_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vecs.set_column(j, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Largest `|A_ij - δ_ij|` of `A = M† M`.
pub fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let g = m.adjoint() * m;
    let mut d: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((g[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    d
}

pub fn to_dvector(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_is_thread_count_independent() {
        let a: Vec<C64> = (0..10_000).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let b: Vec<C64> = (0..10_000).map(|i| C64::new((i as f64 * 0.7).cos(), 0.1 * i as f64)).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let x = one.install(|| dot(&a, &b));
        let y = four.install(|| dot(&a, &b));
        assert_eq!(x.re.to_bits(), y.re.to_bits());
        assert_eq!(x.im.to_bits(), y.im.to_bits());
    }

    #[test]
    fn eigh_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(1.0, 0.0)]);
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] - 0.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        assert!(unitarity_deviation(&vecs) < 1e-12);
    }
}
