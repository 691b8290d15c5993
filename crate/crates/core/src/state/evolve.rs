use crate::linalg;
use crate::ops::PauliSum;
use crate::{Error, Result, C64};

use super::{SparseOperator, StateVector};

/// Anti-Hermitian operator compiled for repeated exponential action.
#[derive(Debug, Clone)]
pub struct Generator {
    op: SparseOperator,
    norm_bound: f64,
}

const ANTI_HERMITIAN_TOL: f64 = 1e-12;

impl Generator {
    pub fn new(tau: &PauliSum) -> Result<Self> {
        let dev = tau.anti_hermitian_deviation();
        if dev > ANTI_HERMITIAN_TOL {
            return Err(Error::NotAntiHermitian(dev));
        }
        let op = SparseOperator::from_pauli(tau);
        let norm_bound = op.inf_norm();
        Ok(Self { op, norm_bound })
    }

    pub fn from_sparse(op: SparseOperator) -> Result<Self> {
        let dev = op.anti_hermitian_deviation();
        if dev > ANTI_HERMITIAN_TOL {
            return Err(Error::NotAntiHermitian(dev));
        }
        let norm_bound = op.inf_norm();
        Ok(Self { op, norm_bound })
    }

    pub fn n_qubits(&self) -> usize {
        self.op.n_qubits()
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }

    /// Upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.op.apply(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionMode {
    /// One exponential of the summed generator.
    Exact,
    /// Ordered product of factor exponentials repeated `k` times with `t/k`.
    Trotter(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionPlan {
    pub mode: EvolutionMode,
    pub taylor_tolerance: f64,
}

impl Default for EvolutionPlan {
    fn default() -> Self {
        Self::exact()
    }
}

impl EvolutionPlan {
    pub fn exact() -> Self {
        Self {
            mode: EvolutionMode::Exact,
            taylor_tolerance: 1e-12,
        }
    }

    pub fn trotter(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("Trotter step count must be at least 1"));
        }
        Ok(Self {
            mode: EvolutionMode::Trotter(k),
            taylor_tolerance: 1e-12,
        })
    }
}

/// `exp(A) v` for `A` given by its action, using `ceil(norm_bound)` scaled
/// steps of a truncated Taylor series; each step stops once the latest term
/// drops below `tol / steps` relative to the vector norm.
pub fn expm_multiply<F>(apply: F, norm_bound: f64, v: &[C64], tol: f64) -> Vec<C64>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    if norm_bound == 0.0 {
        return v.to_vec();
    }
    let steps = norm_bound.ceil().max(1.0) as usize;
    let inv = 1.0 / steps as f64;
    let step_tol = tol / steps as f64;
    let mut out = v.to_vec();
    for _ in 0..steps {
        let vnorm = linalg::norm(&out);
        let mut term = out.clone();
        let mut acc = out.clone();
        for j in 1..=60 {
            let mut next = apply(&term);
            linalg::scale(C64::new(inv / j as f64, 0.0), &mut next);
            linalg::axpy(C64::new(1.0, 0.0), &next, &mut acc);
            term = next;
            if linalg::norm(&term) <= step_tol * vnorm.max(1e-300) {
                break;
            }
        }
        out = acc;
    }
    out
}

/// `exp(θ τ)|s⟩`.
pub fn evolve(theta: f64, tau: &Generator, s: &StateVector, plan: &EvolutionPlan) -> Result<StateVector> {
    if tau.n_qubits() != s.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: s.n_qubits(),
            actual: tau.n_qubits(),
        });
    }
    if theta == 0.0 {
        return Ok(s.clone());
    }
    let out = expm_multiply(
        |v| {
            let mut w = tau.apply(v);
            linalg::scale(C64::new(theta, 0.0), &mut w);
            w
        },
        theta.abs() * tau.norm_bound(),
        s.amplitudes(),
        plan.taylor_tolerance,
    );
    Ok(StateVector::from_raw(s.n_qubits(), out))
}

/// UCC state `exp(Σ t_u τ_u)|ref⟩` (exact) or its Trotterized product.
///
/// In Trotter mode the first generator in the list acts first.
pub fn ucc_state(
    params: &[f64],
    generators: &[&Generator],
    reference: &StateVector,
    plan: &EvolutionPlan,
) -> Result<StateVector> {
    if params.len() != generators.len() {
        return Err(Error::DimensionMismatch {
            expected: generators.len(),
            actual: params.len(),
        });
    }
    if let Some(g) = generators.iter().find(|g| g.n_qubits() != reference.n_qubits()) {
        return Err(Error::DimensionMismatch {
            expected: reference.n_qubits(),
            actual: g.n_qubits(),
        });
    }
    match plan.mode {
        EvolutionMode::Exact => {
            let bound: f64 = params
                .iter()
                .zip(generators)
                .map(|(t, g)| t.abs() * g.norm_bound())
                .sum();
            let out = expm_multiply(
                |v| {
                    let mut acc = vec![C64::new(0.0, 0.0); v.len()];
                    for (t, g) in params.iter().zip(generators) {
                        if *t != 0.0 {
                            linalg::axpy(C64::new(*t, 0.0), &g.apply(v), &mut acc);
                        }
                    }
                    acc
                },
                bound,
                reference.amplitudes(),
                plan.taylor_tolerance,
            );
            Ok(StateVector::from_raw(reference.n_qubits(), out))
        }
        EvolutionMode::Trotter(k) => {
            let mut s = reference.clone();
            for _ in 0..k {
                for (t, g) in params.iter().zip(generators) {
                    s = evolve(t / k as f64, g, &s, plan)?;
                }
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{jordan_wigner, FermionOperator};

    fn single(p: usize, q: usize, n: usize) -> Generator {
        let t = FermionOperator::one_body(p, q);
        Generator::new(&jordan_wigner(&(&t - &t.adjoint()), n).unwrap()).unwrap()
    }

    #[test]
    fn two_level_rotation() {
        let g = single(1, 0, 2);
        let s = StateVector::basis(2, 0b01);
        for theta in [0.3, -1.2, 2.0] {
            let out = evolve(theta, &g, &s, &EvolutionPlan::exact()).unwrap();
            let a = out.amplitudes();
            assert!((a[0b01] - C64::new(theta.cos(), 0.0)).norm() < 1e-12);
            assert!((a[0b10] - C64::new(theta.sin(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_angle_is_identity() {
        let g = single(2, 0, 3);
        let s = StateVector::basis(3, 0b001);
        assert_eq!(evolve(0.0, &g, &s, &EvolutionPlan::exact()).unwrap(), s);
    }

    #[test]
    fn rejects_hermitian_generator() {
        let t = FermionOperator::one_body(1, 0);
        let h = jordan_wigner(&(&t + &t.adjoint()), 2).unwrap();
        assert!(matches!(Generator::new(&h), Err(Error::NotAntiHermitian(_))));
    }

    #[test]
    fn trotter_needs_a_step() {
        assert!(EvolutionPlan::trotter(0).is_err());
    }
}
