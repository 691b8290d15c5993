//! ACSE residuals, error statistics and CSV output of scans.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::hamiltonian::hartree_to_kcalmol;
use crate::linalg;
use crate::ops::PoolGenerator;
use crate::state::{Observable, StateVector};
use crate::{Error, Result};

/// Commutator and anticommutator residuals of a state over a pool.
#[derive(Debug, Clone, PartialEq)]
pub struct AcseReport {
    /// `⟨[τ_u, H]⟩` per generator (Hartree).
    pub real_part: Vec<f64>,
    /// `−i ⟨{τ_u, H}⟩` per generator (Hartree).
    pub imag_part: Vec<f64>,
    /// Largest `|real_part|` in kcal/mol.
    pub mare_re: f64,
    /// Largest `|imag_part|` in kcal/mol.
    pub mare_im: f64,
}

/// ACSE residuals of `state` for every pool generator.
///
/// With `a = ⟨τψ|Hψ⟩`, the commutator expectation is `−2 Re a` and the
/// anticommutator expectation is `−2i Im a`.
pub fn acse_residuals(state: &StateVector, h: &Observable, pool: &[PoolGenerator]) -> Result<AcseReport> {
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: h.n_qubits(),
            actual: state.n_qubits(),
        });
    }
    let hpsi = h.apply(state.amplitudes());
    let pairs: Vec<(f64, f64)> = pool
        .par_iter()
        .map(|g| {
            let a = linalg::dot(&g.generator.apply(state.amplitudes()), &hpsi);
            (-2.0 * a.re, -2.0 * a.im)
        })
        .collect();
    let (real_part, imag_part): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mare = |v: &[f64]| hartree_to_kcalmol(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    Ok(AcseReport {
        mare_re: mare(&real_part),
        mare_im: mare(&imag_part),
        real_part,
        imag_part,
    })
}

/// One method's result at one geometry of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    /// Geometry parameter (Å for chains, a model parameter otherwise).
    pub r: f64,
    pub method: String,
    /// Hartree; `NaN` when the method failed at this point.
    pub energy: f64,
    /// Error against FCI in kcal/mol.
    pub error_kcalmol: f64,
    pub status: String,
}

impl ScanRow {
    pub fn new(r: f64, method: impl Into<String>, energy: f64, fci: f64) -> Self {
        Self {
            r,
            method: method.into(),
            energy,
            error_kcalmol: hartree_to_kcalmol(energy - fci),
            status: "ok".into(),
        }
    }

    pub fn failed(r: f64, method: impl Into<String>, status: impl Into<String>) -> Self {
        Self {
            r,
            method: method.into(),
            energy: f64::NAN,
            error_kcalmol: f64::NAN,
            status: status.into(),
        }
    }
}

/// Mean and maximum absolute error (kcal/mol) of one method over the rows.
///
/// Failed rows are skipped; `None` if the method has no successful row.
pub fn error_stats(rows: &[ScanRow], method: &str) -> Option<(f64, f64)> {
    let errs: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == method && r.error_kcalmol.is_finite())
        .map(|r| r.error_kcalmol.abs())
        .collect();
    if errs.is_empty() {
        return None;
    }
    let mut sorted = errs.clone();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Some((mean, sorted[sorted.len() - 1]))
}

pub const CSV_HEADER: &str = "R,method,energy_hartree,error_kcalmol";

/// CSV with the fixed header, eight decimals for Hartree and six for
/// kcal/mol. Values below the printed resolution print as zero.
pub fn write_csv(rows: &[ScanRow], with_status: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    if with_status {
        out.push_str(",status");
    }
    out.push('\n');
    let fixed = |x: f64, d: usize| -> String {
        if !x.is_finite() {
            return "nan".into();
        }
        let s = format!("{x:.d$}");
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            format!("{:.d$}", 0.0)
        } else {
            s
        }
    };
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{}",
            r.r,
            r.method,
            fixed(r.energy, 8),
            fixed(r.error_kcalmol, 6)
        );
        if with_status {
            let _ = write!(out, ",{}", r.status);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_examples() {
        let rows = vec![ScanRow::new(1.0, "fci", -1.0, -1.0), ScanRow::new(1.1, "fci", -1.2, -1.2)];
        assert_eq!(error_stats(&rows, "fci"), Some((0.0, 0.0)));
        let one = vec![ScanRow::new(1.0, "adapt", -0.999, -1.0)];
        let (me, mx) = error_stats(&one, "adapt").unwrap();
        assert!((me - hartree_to_kcalmol(0.001)).abs() < 1e-9);
        assert_eq!(me, mx);
        assert_eq!(error_stats(&one, "uccsd"), None);
    }

    #[test]
    fn csv_format() {
        let rows = vec![ScanRow::new(0.5, "hf", -1.123456789, -1.2)];
        let csv = write_csv(&rows, false);
        assert_eq!(csv, "R,method,energy_hartree,error_kcalmol\n0.5,hf,-1.12345679,48.031590\n");
    }

    #[test]
    fn negative_zero_prints_as_zero() {
        let rows = vec![ScanRow::new(1.0, "fci", -1.0, -1.0 + 1e-14)];
        assert!(write_csv(&rows, false).ends_with(",0.000000\n"));
    }
}
