use std::path::Path;

use kvqe::diagnostics::{error_stats, ScanRow};
use kvqe::fci::fci_integrals;
use kvqe::hamiltonian::*;
use kvqe::ops::*;
use kvqe::state::*;
use kvqe::vqe::{energy, pre_estimated_gradients, AnsatzForm};
use kvqe::C64;
use nalgebra::DVector;
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn ladder(mode: usize, dagger: bool) -> PauliSum {
    jordan_wigner(&FermionOperator::term(&[(mode, dagger)], c(1.0)), 6).unwrap()
}

fn setup(ncell: usize, t1: f64, t2: f64, u: f64) -> (IntegralSet, Observable, Vec<PoolGenerator>, StateVector) {
    let ints = build_ssh_hubbard(ncell, t1, t2, u, OrbitalBasis::Band);
    let r = ReferenceDeterminant::aufbau(&ints).unwrap();
    let h = Observable::new(build_qubit_hamiltonian(&ints).unwrap()).unwrap();
    let pool = build_pool(&ints, PoolKind::GSD, &r).unwrap();
    let psi = prepare_reference(&r, ints.n_qubits()).unwrap();
    (ints, h, pool, psi)
}

fn random_state(n_qubits: usize, seed: &[f64]) -> StateVector {
    let dim = 1 << n_qubits;
    let amps = (0..dim)
        .map(|i| {
            let a = seed[i % seed.len()];
            C64::new((a * (i as f64 + 1.0)).sin(), (a + 0.3 * i as f64).cos())
        })
        .collect();
    StateVector::normalized(n_qubits, amps).unwrap()
}

fn pauli_char() -> impl Strategy<Value = char> {
    prop::sample::select(vec!['I', 'X', 'Y', 'Z'])
}

fn pauli_sum(n: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((prop::collection::vec(pauli_char(), n), -1.0..1.0f64, -1.0..1.0f64), 1..6).prop_map(
        move |terms| {
            let mut s = PauliSum::zero(n);
            for (chars, re, im) in terms {
                let label: Vec<String> = chars.iter().enumerate().map(|(q, ch)| format!("{ch}{q}")).collect();
                let label = label.join(" ");
                s.add_term(PauliString::parse(&label).unwrap(), C64::new(re, im));
            }
            s
        },
    )
}

fn shifted(a: &IntegralSet, b: &IntegralSet, alpha: f64, beta: f64) -> IntegralSet {
    let mut out = a.clone();
    out.h1 = a.h1.map(|x| x * alpha) + b.h1.map(|x| x * beta);
    for (o, (x, y)) in out
        .h2
        .as_mut_slice()
        .iter_mut()
        .zip(a.h2.as_slice().iter().zip(b.h2.as_slice()))
    {
        *o = x * alpha + y * beta;
    }
    out.ecore = alpha * a.ecore + beta * b.ecore;
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jordan_wigner_anticommutators(i in 0usize..6, j in 0usize..6) {
        let (ai, aj_dag) = (ladder(i, false), ladder(j, true));
        let anti = &(&ai * &aj_dag) + &(&aj_dag * &ai);
        let expected = PauliSum::identity(6, c(if i == j { 1.0 } else { 0.0 }));
        prop_assert!(anti.max_abs_diff(&expected) < 1e-12);
        let (ai_dag, aj) = (ladder(i, true), ladder(j, false));
        let same = &(&ai * &aj) + &(&aj * &ai);
        prop_assert!(same.max_abs_diff(&PauliSum::zero(6)) < 1e-12);
        let same_dag = &(&ai_dag * &aj_dag) + &(&aj_dag * &ai_dag);
        prop_assert!(same_dag.max_abs_diff(&PauliSum::zero(6)) < 1e-12);
    }

    #[test]
    fn pool_generators_are_anti_hermitian_and_conserve_n_sz(t2 in 0.1..1.5f64, u in 0.0..6.0f64) {
        let (ints, _, pool, _) = setup(2, 1.0, t2, u);
        prop_assert!(!pool.is_empty());
        for g in &pool {
            prop_assert!(g.tau.is_anti_hermitian(1e-12));
            prop_assert!(g.tau.conserves_number_and_sz());
            for term in g.factors() {
                let labelled: Vec<(usize, bool)> = term.iter().map(|&(q, d)| (ints.orb_k[q / 2], d)).collect();
                prop_assert!(momentum_conserved(&labelled, &ints.kmesh));
            }
        }
    }

    #[test]
    fn evolution_preserves_norm(theta in -3.0..3.0f64, which in 0usize..30, seed in prop::collection::vec(-2.0..2.0f64, 3)) {
        let (_, _, pool, _) = setup(2, 1.0, 0.6, 4.0);
        let g = &pool[which % pool.len()].generator;
        let s = random_state(8, &seed);
        let out = evolve(theta, g, &s, &EvolutionPlan::exact()).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sparse_apply_matches_dense(op in pauli_sum(4), seed in prop::collection::vec(-2.0..2.0f64, 3)) {
        let s = random_state(4, &seed);
        let fast = apply(&op, &s).unwrap();
        let dense = op.to_dense() * DVector::from_column_slice(s.amplitudes());
        for (a, b) in fast.iter().zip(dense.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ansatz_energy_is_variational(params in prop::collection::vec(-1.5..1.5f64, 6)) {
        let (ints, h, pool, psi) = setup(2, 1.0, 0.6, 4.0);
        let e0 = fci_integrals(&ints, 1).unwrap().energies[0];
        let gens: Vec<&Generator> = pool.iter().take(6).map(|g| &g.generator).collect();
        let plan = EvolutionPlan::exact();
        for form in [AnsatzForm::Product, AnsatzForm::Ucc] {
            let e = energy(&h, form, &params, &gens, &psi, &plan).unwrap();
            prop_assert!(e >= e0 - 1e-10);
        }
    }

    #[test]
    fn pfcidump_round_trip(t1 in 0.2..2.0f64, t2 in 0.0..2.0f64, u in 0.0..8.0f64, ncell in 1usize..3) {
        let ints = build_ssh_hubbard(ncell, t1, t2, u, OrbitalBasis::Band);
        let mut text = String::new();
        write_pfcidump_to(&ints, &mut text);
        let back = read_pfcidump(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(back.norb, ints.norb);
        prop_assert_eq!(&back.orb_k, &ints.orb_k);
        prop_assert!((&back.h1 - &ints.h1).iter().all(|z| z.norm() < 1e-11));
        for (a, b) in back.h2.as_slice().iter().zip(ints.h2.as_slice()) {
            prop_assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn hamiltonian_is_linear_in_integrals(alpha in -2.0..2.0f64, beta in -2.0..2.0f64, u in 0.0..5.0f64) {
        let a = build_ssh_hubbard(2, 1.0, 0.6, 4.0, OrbitalBasis::Band);
        let b = build_ssh_hubbard(2, 0.7, 1.1, u, OrbitalBasis::Band);
        let lhs = build_qubit_hamiltonian(&shifted(&a, &b, alpha, beta)).unwrap();
        let ha = build_qubit_hamiltonian(&a).unwrap().scale(c(alpha));
        let hb = build_qubit_hamiltonian(&b).unwrap().scale(c(beta));
        prop_assert!(lhs.max_abs_diff(&(&ha + &hb)) < 1e-10);
    }

    #[test]
    fn band_and_site_spectra_agree(t1 in 0.3..1.5f64, t2 in 0.0..1.5f64, u in 0.0..6.0f64, ncell in 1usize..3) {
        let m = SshHubbard::new(ncell, t1, t2, u);
        let band = fci_integrals(&m.band_integrals(), 3).unwrap().energies;
        let site = fci_integrals(&m.site_integrals(), 3).unwrap().energies;
        for (x, y) in band.iter().zip(&site) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn trotter_error_shrinks_with_steps(params in prop::collection::vec(-0.5..0.5f64, 4)) {
        let (_, _, pool, psi) = setup(2, 1.0, 0.6, 4.0);
        let gens: Vec<&Generator> = pool.iter().take(4).map(|g| &g.generator).collect();
        let exact = ucc_state(&params, &gens, &psi, &EvolutionPlan::exact()).unwrap();
        let err = |k: usize| {
            let s = ucc_state(&params, &gens, &psi, &EvolutionPlan::trotter(k).unwrap()).unwrap();
            let d: Vec<C64> = s.amplitudes().iter().zip(exact.amplitudes()).map(|(a, b)| a - b).collect();
            kvqe::linalg::norm(&d)
        };
        let (e2, e16) = (err(2), err(16));
        prop_assert!(e16 <= e2 / 4.0 + 1e-11, "{} vs {}", e16, e2);
    }

    #[test]
    fn error_stats_ignore_row_order(
        rows in prop::collection::vec((0.5..2.0f64, -2.0..-1.0f64, 0.0..0.01f64), 1..12)
            .prop_map(|v| v.into_iter().map(|(r, fci, d)| ScanRow::new(r, "adapt", fci + d, fci)).collect::<Vec<_>>())
            .prop_flat_map(|rows| (Just(rows.clone()), Just(rows).prop_shuffle()))
    ) {
        prop_assert_eq!(error_stats(&rows.0, "adapt"), error_stats(&rows.1, "adapt"));
    }
}

#[test]
fn pool_gradients_are_thread_count_independent() {
    let (_, h, pool, psi) = setup(2, 1.0, 0.6, 4.0);
    let s = ucc_state(
        &[0.1, -0.2, 0.3],
        &pool.iter().take(3).map(|g| &g.generator).collect::<Vec<_>>(),
        &psi,
        &EvolutionPlan::exact(),
    )
    .unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| pre_estimated_gradients(&s, &h, &pool).unwrap())
    };
    let one = run(1);
    for t in [2, 4, 7] {
        assert!(one.iter().zip(run(t)).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
