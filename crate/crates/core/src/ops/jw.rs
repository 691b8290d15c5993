use super::{FermionOperator, PauliString, PauliSum};
use crate::{Error, Result, C64};

/// Qubit image of a single ladder operator:
/// `a†_j = ½(X_j − iY_j) Z_{j−1}…Z_0`, `a_j = ½(X_j + iY_j) Z_{j−1}…Z_0`.
fn ladder_image(mode: usize, dagger: bool, n_qubits: usize) -> PauliSum {
    let parity = (1u64 << mode) - 1;
    let xs = PauliString {
        x: 1 << mode,
        z: parity,
    };
    let ys = PauliString {
        x: 1 << mode,
        z: parity | (1 << mode),
    };
    let sign = if dagger { -0.5 } else { 0.5 };
    let mut out = PauliSum::single(n_qubits, xs, C64::new(0.5, 0.0));
    out.add_term(ys, C64::new(0.0, sign));
    out
}

/// Jordan–Wigner image of a fermion operator on `n_qubits` qubits.
pub fn jordan_wigner(op: &FermionOperator, n_qubits: usize) -> Result<PauliSum> {
    if n_qubits > 64 {
        return Err(Error::invalid("Jordan-Wigner supports at most 64 qubits"));
    }
    if let Some(m) = op.max_mode() {
        if m >= n_qubits {
            return Err(Error::invalid(format!(
                "mode {m} out of range for {n_qubits} qubits"
            )));
        }
    }
    let mut out = PauliSum::zero(n_qubits);
    for (factors, coeff) in op.terms() {
        let mut prod = PauliSum::identity(n_qubits, coeff);
        for &(m, d) in factors {
            prod = &prod * &ladder_image(m, d, n_qubits);
        }
        for (p, c) in prod.terms() {
            out.add_term(*p, *c);
        }
    }
    out.prune();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::FermionOperator;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn creation_on_lowest_mode() {
        let op = FermionOperator::term(&[(0, true)], one());
        let img = jordan_wigner(&op, 1).unwrap();
        assert_eq!(img.len(), 2);
        assert_eq!(img.coeff(&PauliString::x(0)), C64::new(0.5, 0.0));
        assert_eq!(img.coeff(&PauliString::y(0)), C64::new(0.0, -0.5));
    }

    #[test]
    fn number_operator() {
        let img = jordan_wigner(&FermionOperator::one_body(1, 1), 2).unwrap();
        assert_eq!(img.len(), 2);
        assert_eq!(img.coeff(&PauliString::IDENTITY), C64::new(0.5, 0.0));
        assert_eq!(img.coeff(&PauliString::z(1)), C64::new(-0.5, 0.0));
    }

    #[test]
    fn anticommutator_maps_to_identity() {
        let a = FermionOperator::term(&[(0, false)], one());
        let ad = FermionOperator::term(&[(0, true)], one());
        let anti = &(&a * &ad) + &(&ad * &a);
        let img = jordan_wigner(&anti, 1).unwrap();
        assert_eq!(img, PauliSum::identity(1, one()));
    }

    #[test]
    fn out_of_range_rejected() {
        let op = FermionOperator::one_body(4, 0);
        assert!(jordan_wigner(&op, 4).is_err());
    }

    #[test]
    fn creation_matrix_raises_occupation() {
        // a†_1 on |01> (qubit 0 occupied) gives -|11>.
        let op = FermionOperator::term(&[(1, true)], one());
        let m = jordan_wigner(&op, 2).unwrap().to_dense();
        assert!((m[(3, 1)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((m[(2, 0)] - one()).norm() < 1e-15);
    }
}
