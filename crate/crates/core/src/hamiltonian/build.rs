use super::IntegralSet;
use crate::ops::{jordan_wigner, FermionOperator, PauliSum};
use crate::{Result, C64};

/// Second-quantized Hamiltonian over spin orbitals (qubit `2p + σ`):
/// `H = Σ h^p_q a†_{pσ} a_{qσ} + ½ Σ h^{pq}_{rs} a†_{pσ} a†_{qτ} a_{rτ} a_{sσ} + ecore`.
///
/// Momentum-violating entries are zero by the [`IntegralSet`] invariant and
/// are skipped, which realises the restricted k-point summation.
pub fn build_hamiltonian(ints: &IntegralSet) -> FermionOperator {
    let n = ints.norb;
    let mut factors: Vec<(Vec<(usize, bool)>, C64)> = Vec::new();
    for p in 0..n {
        for q in 0..n {
            let v = ints.h1[(p, q)];
            if v.norm() == 0.0 {
                continue;
            }
            for sigma in 0..2 {
                factors.push((vec![(2 * p + sigma, true), (2 * q + sigma, false)], v));
            }
        }
    }
    for ([p, q, r, s], v) in ints.h2.iter_indexed() {
        if v.norm() == 0.0 {
            continue;
        }
        for sigma in 0..2 {
            for tau in 0..2 {
                if p == q && sigma == tau || r == s && sigma == tau {
                    continue;
                }
                factors.push((
                    vec![
                        (2 * p + sigma, true),
                        (2 * q + tau, true),
                        (2 * r + tau, false),
                        (2 * s + sigma, false),
                    ],
                    0.5 * v,
                ));
            }
        }
    }
    let mut h = FermionOperator::identity(C64::new(ints.ecore, 0.0));
    for (f, c) in &factors {
        h.add_product(f, *c);
    }
    h
}

/// Jordan–Wigner image of [`build_hamiltonian`].
pub fn build_qubit_hamiltonian(ints: &IntegralSet) -> Result<PauliSum> {
    jordan_wigner(&build_hamiltonian(ints), ints.n_qubits())
}
