//! Plain-text reports. Each starts with the resolved configuration.

use std::fmt::Write as _;

use kvqe::diagnostics::{error_stats, ScanRow};
use kvqe::experiment::{Method, Outcome};
use kvqe::hamiltonian::hartree_to_kcalmol;

use crate::config::ExperimentConfig;

fn header(cfg: &ExperimentConfig) -> String {
    let mut s = String::from("# resolved configuration\n");
    s.push_str(&cfg.resolved());
    s.push_str("\n# results\n");
    s
}

pub fn run_report(cfg: &ExperimentConfig, o: &Outcome) -> String {
    let mut s = header(cfg);
    let _ = writeln!(s, "method = {}", o.method);
    let _ = writeln!(s, "reference energy = {:.10}", o.reference_energy);
    for (i, e) in o.energies.iter().enumerate() {
        let _ = writeln!(s, "energy[{i}] = {e:.10}");
    }
    for (i, e) in o.fci_energies.iter().enumerate() {
        let _ = writeln!(s, "fci energy[{i}] = {e:.10}");
    }
    let _ = writeln!(
        s,
        "error = {:.3e} Ha ({:.6} kcal/mol)",
        o.error(),
        hartree_to_kcalmol(o.error())
    );
    let _ = writeln!(s, "pool size = {}", o.pool_size);
    let _ = writeln!(s, "operators = {}", o.n_parameters);
    let _ = writeln!(s, "iterations = {}", o.iterations);
    if let Some(r) = o.residual_norm {
        let _ = writeln!(s, "final residual norm = {r:.3e}");
    }
    let _ = writeln!(s, "converged = {}", o.converged);
    if let Some(x) = o.imag_residue {
        let _ = writeln!(s, "rotated integral imaginary residue = {x:.3e}");
    }
    if let Some(a) = &o.acse {
        let _ = writeln!(s, "ACSE MARE real part = {:.6} kcal/mol", a.mare_re);
        let _ = writeln!(s, "ACSE MARE imaginary part = {:.6} kcal/mol", a.mare_im);
    }
    s
}

pub fn scan_report(cfg: &ExperimentConfig, methods: &[Method], rows: &[ScanRow]) -> String {
    let mut s = header(cfg);
    let _ = writeln!(s, "points = {}", rows.len() / methods.len().max(1));
    for m in methods {
        match error_stats(rows, m.name()) {
            Some((mean, max)) => {
                let _ = writeln!(s, "{m}: mean error = {mean:.6} kcal/mol, max error = {max:.6} kcal/mol");
            }
            None => {
                let _ = writeln!(s, "{m}: no successful points");
            }
        }
    }
    let failed: Vec<&ScanRow> = rows.iter().filter(|r| r.status != "ok").collect();
    for r in failed {
        let _ = writeln!(s, "{} at r = {}: {}", r.method, r.r, r.status);
    }
    s
}
