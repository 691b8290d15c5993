//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use kvqe::diagnostics::{acse_residuals, write_csv};
use kvqe::experiment::{scan, Method, MethodParams, ScanPoint, ScanSpec, Source};
use kvqe::fci::fci_integrals;
use kvqe::hamiltonian::*;
use kvqe::k2g::{realify, rotate_integrals};
use kvqe::ops::{build_pool, ExcitationRank, PoolGenerator, PoolKind};
use kvqe::optimize::{finite_difference_gradient, OptimizerSettings};
use kvqe::qse::{qse, QseSpace, QseTruncation, OVERLAP_THRESHOLD};
use kvqe::state::{prepare_reference, EvolutionPlan, Generator, Observable, StateVector};
use kvqe::vqe::{adapt_vqe, analytic_gradient, energy, pre_estimated_gradients, ucc_vqe, AdaptConfig, AnsatzForm, FD_STEP};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIMER_FCI: f64 = -0.8284271247;

struct Fixture {
    name: &'static str,
    ints: IntegralSet,
    reference: ReferenceDeterminant,
    h: Observable,
    psi0: StateVector,
    fci: Vec<f64>,
}

impl Fixture {
    fn new(name: &'static str, ints: IntegralSet) -> Self {
        let reference = ReferenceDeterminant::aufbau(&ints).unwrap();
        let h = Observable::new(build_qubit_hamiltonian(&ints).unwrap()).unwrap();
        let psi0 = prepare_reference(&reference, ints.n_qubits()).unwrap();
        let fci = fci_integrals(&ints, 2).unwrap().energies;
        Self {
            name,
            ints,
            reference,
            h,
            psi0,
            fci,
        }
    }

    fn pool(&self, kind: PoolKind) -> Vec<PoolGenerator> {
        build_pool(&self.ints, kind, &self.reference).unwrap()
    }

    fn adapt(&self, epsilon: f64) -> (kvqe::vqe::AnsatzTrace, StateVector, Vec<PoolGenerator>) {
        let pool = self.pool(PoolKind::GSD);
        let trace = adapt_vqe(&self.h, &pool, &self.psi0, &AdaptConfig::with_epsilon(epsilon).unwrap()).unwrap();
        let state = trace.state(&pool, &self.psi0).unwrap();
        (trace, state, pool)
    }

    fn ucc(&self, kind: PoolKind) -> f64 {
        let pool = self.pool(kind);
        ucc_vqe(&self.h, &pool, &self.psi0, &EvolutionPlan::exact(), &OptimizerSettings::default())
            .unwrap()
            .energy
    }

    fn qse_ground(&self, state: &StateVector) -> f64 {
        let space = QseSpace::build(&self.ints, &self.reference, QseTruncation::SD).unwrap();
        qse(state, &self.h, &space, OVERLAP_THRESHOLD).unwrap().energies[0]
    }
}

fn ssh_band() -> IntegralSet {
    build_ssh_hubbard(2, 1.0, 0.6, 4.0, OrbitalBasis::Band)
}

fn realified() -> IntegralSet {
    let model = SshHubbard::new(2, 1.0, 0.6, 4.0);
    let real = realify(&model.band_orbitals(), 2).unwrap();
    rotate_integrals(&model.band_integrals(), &real.rotation).unwrap().integrals
}

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn dimer_oracle(rep: &mut Report) {
    let start = Instant::now();
    let f = Fixture::new("dimer", build_ssh_hubbard(1, 1.0, 0.0, 4.0, OrbitalBasis::Band));
    let uccsd = f.ucc(PoolKind::SD);
    let (adapt, _, _) = f.adapt(1e-3);
    let (_, loose, _) = f.adapt(1e-1);
    let qse_e = f.qse_ground(&loose);
    let elapsed = start.elapsed();
    let errs = [uccsd - DIMER_FCI, adapt.energy - DIMER_FCI, qse_e - DIMER_FCI];
    let pass = errs.iter().all(|e| e.abs() <= 1e-8) && elapsed < Duration::from_secs(1);
    rep.line(
        "dimer oracle",
        pass,
        format!(
            "UCCSD err {:.1e}, ADAPT(1e-3) err {:.1e}, QSE-on-ADAPT(1e-1) err {:.1e} (tol 1e-8), {:.0} ms (limit 1000)",
            errs[0],
            errs[1],
            errs[2],
            elapsed.as_secs_f64() * 1e3
        ),
    );
}

fn pathology_and_k2g(rep: &mut Report) {
    let start = Instant::now();
    let band = Fixture::new("band", ssh_band());
    let (trace, state, pool) = band.adapt(1e-3);
    let acse = acse_residuals(&state, &band.h, &pool).unwrap();
    let band_err = (trace.energy - band.fci[0]).abs();

    let k2g = Fixture::new("k2g", realified());
    let (ktrace, kstate, kpool) = k2g.adapt(1e-3);
    let kacse = acse_residuals(&kstate, &k2g.h, &kpool).unwrap();
    let k2g_err = (ktrace.energy - band.fci[0]).abs();
    let elapsed = start.elapsed();

    let ratio = band_err / k2g_err.max(f64::MIN_POSITIVE);
    let pass = trace.converged
        && trace.final_residual_norm() < 1e-3
        && acse.mare_im > 1e-3
        && ratio >= 10.0
        && elapsed < Duration::from_secs(120);
    rep.line(
        "complex-basis pathology",
        pass,
        format!(
            "converged {}, |R| {:.2e} (< 1e-3), MARE_im {:.3} kcal/mol (> 1e-3), error {:.3e} Ha vs K2G {:.3e} Ha, ratio {:.1e} (>= 10), {:.2} s (limit 120)",
            trace.converged,
            trace.final_residual_norm(),
            acse.mare_im,
            band_err,
            k2g_err,
            ratio,
            elapsed.as_secs_f64()
        ),
    );
    rep.line(
        "K2G removes imaginary ACSE residual",
        kacse.mare_im <= 1e-10 && k2g_err <= 1e-6,
        format!("MARE_im {:.1e} kcal/mol (<= 1e-10), ADAPT(1e-3) error {:.1e} Ha (<= 1e-6)", kacse.mare_im, k2g_err),
    );
}

fn unitary_invariance(rep: &mut Report) {
    let band = fci_integrals(&ssh_band(), 2).unwrap().energies;
    let real = fci_integrals(&realified(), 2).unwrap().energies;
    let d0 = (band[0] - real[0]).abs();
    let d1 = (band[1] - real[1]).abs();
    rep.line(
        "unitary invariance",
        d0 <= 1e-9 && d1 <= 1e-9,
        format!("ground diff {d0:.1e}, first excited diff {d1:.1e} (tol 1e-9)"),
    );
}

fn gradient_consistency(rep: &mut Report) {
    let f = Fixture::new("band", ssh_band());
    let pool = f.pool(PoolKind::GSD);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let plan = EvolutionPlan::exact();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let len = rng.random_range(1..=8);
        let gens: Vec<&Generator> = (0..len).map(|_| &pool[rng.random_range(0..pool.len())].generator).collect();
        let params: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = analytic_gradient(&f.h, &gens, &params, &f.psi0, &plan).unwrap();
        let fd = finite_difference_gradient(
            |x| energy(&f.h, AnsatzForm::Product, x, &gens, &f.psi0, &plan).unwrap(),
            &params,
            FD_STEP,
        );
        let diff = a.iter().zip(&fd).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        worst = worst.max(diff);
    }
    rep.line(
        "gradient consistency",
        worst <= 1e-6,
        format!("max |analytic - finite difference| over 20 random vectors {worst:.1e} (tol 1e-6)"),
    );
}

fn variational_ordering(rep: &mut Report) {
    let fixtures = [
        Fixture::new("dimer", build_ssh_hubbard(1, 1.0, 0.0, 4.0, OrbitalBasis::Band)),
        Fixture::new("SSH band", ssh_band()),
        Fixture::new("SSH K2G", realified()),
    ];
    for f in &fixtures {
        let (uccsd, uccgsd) = (f.ucc(PoolKind::SD), f.ucc(PoolKind::GSD));
        let e_ref = f.h.expectation(&f.psi0).unwrap();
        let qse_ref = f.qse_ground(&f.psi0);
        let (trace, state, _) = f.adapt(1e-1);
        let qse_adapt = f.qse_ground(&state);
        let pass = f.fci[0] <= uccgsd + 1e-9
            && uccgsd <= uccsd + 1e-9
            && qse_ref <= e_ref + 1e-10
            && qse_adapt <= trace.energy + 1e-10
            && qse_adapt <= e_ref + 1e-10
            && qse_adapt >= f.fci[0] - 1e-9;
        rep.line(
            &format!("variational ordering ({})", f.name),
            pass,
            format!(
                "FCI {:.10} <= UCCGSD {:.10} <= UCCSD {:.10}; QSE(ref) {:.10} <= ref {:.10}; QSE(ADAPT) {:.10} <= ADAPT {:.10}",
                f.fci[0], uccgsd, uccsd, qse_ref, e_ref, qse_adapt, trace.energy
            ),
        );
    }
}

fn qse_full_space(rep: &mut Report) {
    let f = Fixture::new("band", ssh_band());
    let space = QseSpace::build(&f.ints, &f.reference, QseTruncation::SectorComplete).unwrap();
    let res = qse(&f.psi0, &f.h, &space, OVERLAP_THRESHOLD).unwrap();
    let full = fci_integrals(&f.ints, usize::MAX).unwrap().energies;
    let worst = if res.energies.len() == full.len() {
        res.energies.iter().zip(&full).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    } else {
        f64::INFINITY
    };
    rep.line(
        "QSE full-space equivalence",
        worst <= 1e-8,
        format!("{} QSE roots vs {} sector eigenvalues, max diff {worst:.1e} (tol 1e-8)", res.energies.len(), full.len()),
    );
}

fn brillouin(rep: &mut Report) {
    for f in [
        Fixture::new("dimer", build_ssh_hubbard(1, 1.0, 0.0, 4.0, OrbitalBasis::Band)),
        Fixture::new("SSH band", ssh_band()),
        Fixture::new("SSH K2G", realified()),
    ] {
        let pool = f.pool(PoolKind::SD);
        let g = pre_estimated_gradients(&f.psi0, &f.h, &pool).unwrap();
        let singles: Vec<f64> = pool
            .iter()
            .zip(&g)
            .filter(|(p, _)| p.rank == ExcitationRank::Single)
            .map(|(_, v)| v.abs())
            .collect();
        let worst = singles.iter().fold(0.0f64, |m, v| m.max(*v));
        rep.line(
            &format!("Brillouin condition ({})", f.name),
            worst <= 1e-8,
            format!("max |single gradient| {worst:.1e} over {} singles (tol 1e-8)", singles.len()),
        );
    }
}

fn determinism(rep: &mut Report) {
    let ssh = |t2: f64| Source::Ssh {
        model: SshHubbard::new(2, 1.0, t2, 4.0),
        basis: OrbitalBasis::Band,
    };
    let spec = ScanSpec {
        points: vec![
            ScanPoint {
                r: 1.0,
                source: Source::dimer(1.0, 4.0),
            },
            ScanPoint { r: 0.4, source: ssh(0.4) },
            ScanPoint { r: 0.6, source: ssh(0.6) },
        ],
        methods: vec![
            Method::Hf,
            Method::Uccsd,
            Method::Uccgsd,
            Method::Adapt,
            Method::K2gAdapt,
            Method::Qse,
            Method::Fci,
        ],
        params: MethodParams::default(),
    };
    let csv_with = |threads: usize| {
        let rows = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| scan(&spec));
        write_csv(&rows, false)
    };
    let first = csv_with(1);
    let runs = [csv_with(1), csv_with(2), csv_with(4), csv_with(4)];
    let same = runs.iter().all(|c| c.as_bytes() == first.as_bytes());
    rep.line(
        "determinism",
        same,
        format!(
            "{} CSV bytes identical across repeated runs and 1/2/4 threads: {same}",
            first.len()
        ),
    );
}

fn main() {
    let mut rep = Report { failures: 0 };
    dimer_oracle(&mut rep);
    pathology_and_k2g(&mut rep);
    unitary_invariance(&mut rep);
    gradient_consistency(&mut rep);
    variational_ordering(&mut rep);
    qse_full_space(&mut rep);
    brillouin(&mut rep);
    determinism(&mut rep);
    if rep.failures > 0 {
        println!("{} criteria failed", rep.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
