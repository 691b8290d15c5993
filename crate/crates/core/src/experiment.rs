//! Experiment driver: runs one method on one integral source, and scans
//! over a list of sources.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagnostics::{acse_residuals, AcseReport, ScanRow};
use crate::fci::fci_integrals;
use crate::hamiltonian::{build_qubit_hamiltonian, load_pfcidump, IntegralSet, OrbitalBasis, ReferenceDeterminant, SshHubbard};
use crate::k2g::{load_supercell_dump, realify, rotate_integrals, OrbitalSet};
use crate::ops::{build_pool, PoolKind};
use crate::optimize::OptimizerSettings;
use crate::qse::{qse, QseSpace, QseTruncation, OVERLAP_THRESHOLD};
use crate::state::{prepare_reference, EvolutionPlan, Observable, StateVector};
use crate::vqe::{adapt_vqe, ucc_vqe, AdaptConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Hf,
    Uccsd,
    Uccgsd,
    Adapt,
    K2gAdapt,
    Qse,
    Fci,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Hf,
        Method::Uccsd,
        Method::Uccgsd,
        Method::Adapt,
        Method::K2gAdapt,
        Method::Qse,
        Method::Fci,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Hf => "hf",
            Method::Uccsd => "uccsd",
            Method::Uccgsd => "uccgsd",
            Method::Adapt => "adapt",
            Method::K2gAdapt => "k2g-adapt",
            Method::Qse => "qse",
            Method::Fci => "fci",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method '{s}' (expected hf, uccsd, uccgsd, adapt, k2g-adapt, qse or fci)"
                ))
            })
    }
}

/// Where the integrals come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Two-site-per-cell SSH-Hubbard ring.
    Ssh { model: SshHubbard, basis: OrbitalBasis },
    /// A PFCIDUMP file, with an optional supercell dump for K2G.
    File { pfcidump: PathBuf, supercell: Option<PathBuf> },
}

impl Source {
    /// Hubbard dimer: one cell without inter-cell hopping.
    pub fn dimer(t: f64, u: f64) -> Self {
        Source::Ssh {
            model: SshHubbard::new(1, t, 0.0, u),
            basis: OrbitalBasis::Band,
        }
    }

    pub fn integrals(&self) -> Result<IntegralSet> {
        match self {
            Source::Ssh { model, basis } => Ok(model.integrals(*basis)),
            Source::File { pfcidump, .. } => load_pfcidump(pfcidump),
        }
    }

    /// Orbitals for realification, when the source provides them.
    pub fn orbitals(&self) -> Result<Option<OrbitalSet>> {
        match self {
            Source::Ssh {
                model,
                basis: OrbitalBasis::Band,
            } => Ok(Some(model.band_orbitals())),
            Source::Ssh { .. } => Ok(None),
            Source::File { supercell, .. } => supercell.as_ref().map(load_supercell_dump).transpose(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub adapt: AdaptConfig,
    /// Pool for ADAPT and for the residual diagnostics.
    pub pool: PoolKind,
    pub plan: EvolutionPlan,
    pub qse_truncation: QseTruncation,
    pub qse_threshold: f64,
    pub n_states: usize,
    pub optimizer: OptimizerSettings,
}

impl Default for MethodParams {
    fn default() -> Self {
        Self {
            adapt: AdaptConfig::default(),
            pool: PoolKind::GSD,
            plan: EvolutionPlan::exact(),
            qse_truncation: QseTruncation::SD,
            qse_threshold: OVERLAP_THRESHOLD,
            n_states: 1,
            optimizer: OptimizerSettings::default(),
        }
    }
}

/// Everything a report needs about one method run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub method: Method,
    /// Ground energy first, then excited energies when requested.
    pub energies: Vec<f64>,
    pub reference_energy: f64,
    pub fci_energies: Vec<f64>,
    pub n_parameters: usize,
    pub iterations: usize,
    pub pool_size: usize,
    pub residual_norm: Option<f64>,
    pub converged: bool,
    pub acse: Option<AcseReport>,
    /// Largest imaginary integral dropped by the K2G rotation.
    pub imag_residue: Option<f64>,
}

impl Outcome {
    pub fn energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn error(&self) -> f64 {
        self.energies[0] - self.fci_energies[0]
    }
}

struct Problem {
    ints: IntegralSet,
    reference: ReferenceDeterminant,
    h: Observable,
    psi0: StateVector,
}

impl Problem {
    fn new(ints: IntegralSet) -> Result<Self> {
        let reference = ReferenceDeterminant::aufbau(&ints)?;
        let h = Observable::new(build_qubit_hamiltonian(&ints)?)?;
        let psi0 = prepare_reference(&reference, ints.n_qubits())?;
        Ok(Self {
            ints,
            reference,
            h,
            psi0,
        })
    }
}

/// Runs `method` on `source`, with FCI alongside as the oracle.
pub fn run_method(source: &Source, method: Method, params: &MethodParams) -> Result<Outcome> {
    let ints = source.integrals()?;
    let orbitals = if method == Method::K2gAdapt {
        Some(source.orbitals()?.ok_or_else(|| {
            Error::invalid("k2g-adapt needs orbital coefficients (band model or supercell dump)")
        })?)
    } else {
        None
    };
    run_on_integrals(ints, orbitals.as_ref(), method, params)
}

/// As [`run_method`], on integrals already in memory.
pub fn run_on_integrals(
    ints: IntegralSet,
    orbitals: Option<&OrbitalSet>,
    method: Method,
    params: &MethodParams,
) -> Result<Outcome> {
    let n_states = params.n_states.max(1);
    let fci_energies = fci_integrals(&ints, n_states)?.energies;
    let mut imag_residue = None;
    let ints = if method == Method::K2gAdapt {
        let orbitals = orbitals.ok_or_else(|| Error::invalid("k2g-adapt needs orbital coefficients"))?;
        if ints.ms2 != 0 || !ints.nelec.is_multiple_of(2) {
            return Err(Error::Unsupported("K2G needs a closed-shell reference".into()));
        }
        let real = realify(orbitals, ints.nelec / 2)?;
        let rotated = rotate_integrals(&ints, &real.rotation)?;
        imag_residue = Some(rotated.max_imag_residue);
        rotated.integrals
    } else {
        ints
    };
    let p = Problem::new(ints)?;
    let reference_energy = p.h.expectation(&p.psi0)?;
    let mut out = Outcome {
        method,
        energies: vec![reference_energy],
        reference_energy,
        fci_energies,
        n_parameters: 0,
        iterations: 0,
        pool_size: 0,
        residual_norm: None,
        converged: true,
        acse: None,
        imag_residue,
    };
    match method {
        Method::Hf => {
            let pool = build_pool(&p.ints, params.pool, &p.reference)?;
            out.pool_size = pool.len();
            out.acse = Some(acse_residuals(&p.psi0, &p.h, &pool)?);
        }
        Method::Fci => out.energies = out.fci_energies.clone(),
        Method::Uccsd | Method::Uccgsd => {
            let kind = if method == Method::Uccsd { PoolKind::SD } else { PoolKind::GSD };
            let pool = build_pool(&p.ints, kind, &p.reference)?;
            let res = ucc_vqe(&p.h, &pool, &p.psi0, &params.plan, &params.optimizer)?;
            let gens: Vec<_> = pool.iter().map(|g| &g.generator).collect();
            let state = crate::state::ucc_state(&res.params, &gens, &p.psi0, &params.plan)?;
            out.energies = vec![res.energy];
            out.n_parameters = res.params.len();
            out.iterations = res.evaluations;
            out.pool_size = pool.len();
            out.converged = res.converged;
            out.acse = Some(acse_residuals(&state, &p.h, &pool)?);
        }
        Method::Adapt | Method::K2gAdapt | Method::Qse => {
            let pool = build_pool(&p.ints, params.pool, &p.reference)?;
            let mut cfg = params.adapt.clone();
            cfg.optimizer = params.optimizer;
            let trace = adapt_vqe(&p.h, &pool, &p.psi0, &cfg)?;
            let state = trace.state(&pool, &p.psi0)?;
            out.energies = vec![trace.energy];
            out.n_parameters = trace.parameters.len();
            out.iterations = trace.iterations;
            out.pool_size = pool.len();
            out.residual_norm = Some(trace.final_residual_norm());
            out.converged = trace.converged;
            out.acse = Some(acse_residuals(&state, &p.h, &pool)?);
            if method == Method::Qse {
                let space = QseSpace::build(&p.ints, &p.reference, params.qse_truncation)?;
                let res = qse(&state, &p.h, &space, params.qse_threshold)?;
                out.energies = res.energies.iter().take(n_states).copied().collect();
            }
        }
    }
    Ok(out)
}

/// One geometry of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub r: f64,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub points: Vec<ScanPoint>,
    pub methods: Vec<Method>,
    pub params: MethodParams,
}

/// Runs every method at every point. Rows follow point order, then method
/// order; a failure becomes a row with its error as the status.
pub fn scan(spec: &ScanSpec) -> Vec<ScanRow> {
    spec.points
        .par_iter()
        .map(|pt| scan_point(pt, &spec.methods, &spec.params))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn scan_point(pt: &ScanPoint, methods: &[Method], params: &MethodParams) -> Vec<ScanRow> {
    let fail_all = |e: Error| -> Vec<ScanRow> {
        log::warn!("scan point {} failed: {e}", pt.r);
        methods.iter().map(|m| ScanRow::failed(pt.r, m.name(), e.to_string())).collect()
    };
    let ints = match pt.source.integrals() {
        Ok(i) => i,
        Err(e) => return fail_all(e),
    };
    let orbitals = if methods.contains(&Method::K2gAdapt) {
        pt.source.orbitals().ok().flatten()
    } else {
        None
    };
    methods
        .iter()
        .map(|&m| match run_on_integrals(ints.clone(), orbitals.as_ref(), m, params) {
            Ok(o) => {
                let mut row = ScanRow::new(pt.r, m.name(), o.energy(), o.fci_energies[0]);
                if !o.converged {
                    row.status = "not-converged".into();
                }
                row
            }
            Err(e) => {
                log::warn!("{m} at {} failed: {e}", pt.r);
                ScanRow::failed(pt.r, m.name(), e.to_string())
            }
        })
        .collect()
}
