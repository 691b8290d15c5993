//! UCC-VQE minimization and the ADAPT-VQE loop.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::linalg;
use crate::ops::PoolGenerator;
use crate::optimize::{bfgs, finite_difference_gradient, OptimizerSettings};
use crate::state::{evolve, ucc_state, EvolutionMode, EvolutionPlan, Generator, Observable, StateVector};
use crate::{Error, Result};

/// Step for central finite-difference gradients.
pub const FD_STEP: f64 = 1e-5;
/// Largest tolerated imaginary part of a commutator expectation.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

/// How a list of generators and parameters forms a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzForm {
    /// `exp(Σ t_u τ_u)|ref⟩`, or its Trotterization under a trotter plan.
    Ucc,
    /// `… exp(θ_2 τ_2) exp(θ_1 τ_1)|ref⟩`: the first generator acts first.
    Product,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub energy: f64,
    pub params: Vec<f64>,
    pub converged: bool,
    pub evaluations: usize,
}

/// Ordered ADAPT ansatz with its optimization history.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzTrace {
    /// Pool ids in growth order; the first acts first on the reference.
    pub generator_ids: Vec<usize>,
    pub parameters: Vec<f64>,
    /// Energy before the first iteration, then after each re-optimization.
    pub energy_history: Vec<f64>,
    /// Pool gradient norm at the start of each iteration.
    pub residual_norm_history: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl AnsatzTrace {
    pub fn final_residual_norm(&self) -> f64 {
        self.residual_norm_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn generators<'a>(&self, pool: &'a [PoolGenerator]) -> Vec<&'a Generator> {
        self.generator_ids.iter().map(|&i| &pool[i].generator).collect()
    }

    /// Prepares the traced state from the reference.
    pub fn state(&self, pool: &[PoolGenerator], reference: &StateVector) -> Result<StateVector> {
        product_state(&self.parameters, &self.generators(pool), reference)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptConfig {
    /// Stop once the pool gradient 2-norm drops below this.
    pub epsilon: f64,
    /// Generators appended per iteration.
    pub batch: usize,
    pub max_iterations: usize,
    pub optimizer: OptimizerSettings,
    /// Whether already-chosen generators may be selected again.
    pub readmit: bool,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            batch: 1,
            max_iterations: 200,
            optimizer: OptimizerSettings::default(),
            readmit: true,
        }
    }
}

impl AdaptConfig {
    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        let cfg = Self {
            epsilon,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `ADAPT(m)` sets ε = 10^-m; `ADAPT(X)` sets ε = 2e-4.
    pub fn preset(name: &str) -> Result<Self> {
        Self::with_epsilon(preset_epsilon(name)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch must be at least 1"));
        }
        Ok(())
    }
}

/// Convergence threshold named by an `ADAPT(m)` / `ADAPT(X)` preset.
pub fn preset_epsilon(name: &str) -> Result<f64> {
    let inner = name
        .trim()
        .strip_prefix("ADAPT(")
        .or_else(|| name.trim().strip_prefix("adapt("))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::invalid(format!("unknown preset '{name}'")))?;
    if inner.eq_ignore_ascii_case("x") {
        return Ok(2e-4);
    }
    let m: i32 = inner
        .parse()
        .map_err(|_| Error::invalid(format!("unknown preset '{name}'")))?;
    Ok(10f64.powi(-m))
}

fn product_state(params: &[f64], gens: &[&Generator], reference: &StateVector) -> Result<StateVector> {
    ucc_state(params, gens, reference, &EvolutionPlan::trotter(1)?)
}

/// State of an ansatz at the given parameters.
pub fn ansatz_state(
    form: AnsatzForm,
    params: &[f64],
    gens: &[&Generator],
    reference: &StateVector,
    plan: &EvolutionPlan,
) -> Result<StateVector> {
    match form {
        AnsatzForm::Ucc => ucc_state(params, gens, reference, plan),
        AnsatzForm::Product => match plan.mode {
            EvolutionMode::Exact => product_state(params, gens, reference),
            EvolutionMode::Trotter(_) => ucc_state(params, gens, reference, plan),
        },
    }
}

/// Energy `⟨ψ(θ)|H|ψ(θ)⟩`.
pub fn energy(
    h: &Observable,
    form: AnsatzForm,
    params: &[f64],
    gens: &[&Generator],
    reference: &StateVector,
    plan: &EvolutionPlan,
) -> Result<f64> {
    h.expectation(&ansatz_state(form, params, gens, reference, plan)?)
}

/// BFGS minimization of the ansatz energy.
///
/// Gradients are exact for exact evolution (a backward sweep for the
/// product form, quadrature for the UCC form) and central finite
/// differences under a Trotter plan.
pub fn minimize(
    h: &Observable,
    form: AnsatzForm,
    gens: &[&Generator],
    init_params: &[f64],
    reference: &StateVector,
    plan: &EvolutionPlan,
    optimizer: &OptimizerSettings,
) -> Result<VqeResult> {
    if init_params.len() != gens.len() {
        return Err(Error::DimensionMismatch {
            expected: gens.len(),
            actual: init_params.len(),
        });
    }
    let exact = plan.mode == EvolutionMode::Exact;
    let mut failure: Option<Error> = None;
    let result = bfgs(
        |x| {
            let run = || -> Result<(f64, Vec<f64>)> {
                let e = energy(h, form, x, gens, reference, plan)?;
                let g = if exact && form == AnsatzForm::Product {
                    analytic_gradient(h, gens, x, reference, plan)?
                } else if exact {
                    ucc_gradient(h, gens, x, reference, plan)?
                } else {
                    let mut err = None;
                    let g = finite_difference_gradient(
                        |y| match energy(h, form, y, gens, reference, plan) {
                            Ok(v) => v,
                            Err(e) => {
                                err.get_or_insert(e);
                                f64::NAN
                            }
                        },
                        x,
                        FD_STEP,
                    );
                    if let Some(e) = err {
                        return Err(e);
                    }
                    g
                };
                Ok((e, g))
            };
            match run() {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    (f64::NAN, vec![0.0; x.len()])
                }
            }
        },
        init_params,
        optimizer,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if !result.converged {
        log::warn!(
            "optimizer stopped after {} evaluations with gradient norm {:.3e}",
            result.evaluations,
            result.grad_inf_norm
        );
    }
    Ok(VqeResult {
        energy: result.value,
        params: result.x,
        converged: result.converged,
        evaluations: result.evaluations,
    })
}

/// Gradient of the exact product-ansatz energy by one forward and one
/// backward sweep.
pub fn analytic_gradient(
    h: &Observable,
    gens: &[&Generator],
    params: &[f64],
    reference: &StateVector,
    plan: &EvolutionPlan,
) -> Result<Vec<f64>> {
    if plan.mode != EvolutionMode::Exact {
        return Err(Error::Unsupported(
            "analytic gradients need exact evolution; use finite differences".into(),
        ));
    }
    let psi = product_state(params, gens, reference)?;
    let hpsi = StateVector::from_raw(psi.n_qubits(), h.apply(psi.amplitudes()));
    let mut phi = psi;
    let mut lambda = hpsi;
    let mut grad = vec![0.0; params.len()];
    for l in (0..params.len()).rev() {
        let tphi = gens[l].apply(phi.amplitudes());
        grad[l] = 2.0 * linalg::dot(lambda.amplitudes(), &tphi).re;
        if l > 0 {
            phi = evolve(-params[l], gens[l], &phi, plan)?;
            lambda = evolve(-params[l], gens[l], &lambda, plan)?;
        }
    }
    Ok(grad)
}

/// Gradient of the exact UCC energy `⟨ψ|H|ψ⟩`, `ψ = exp(A)|ref⟩`,
/// `A = Σ t_u τ_u`.
///
/// `∂ψ/∂t_u = ∫₀¹ exp((1−s)A) τ_u exp(sA)|ref⟩ ds`, integrated by
/// Gauss–Legendre quadrature with enough nodes to resolve the frequencies of
/// `A` to machine precision.
pub fn ucc_gradient(
    h: &Observable,
    gens: &[&Generator],
    params: &[f64],
    reference: &StateVector,
    plan: &EvolutionPlan,
) -> Result<Vec<f64>> {
    if plan.mode != EvolutionMode::Exact {
        return Err(Error::Unsupported(
            "quadrature gradients need exact evolution; use finite differences".into(),
        ));
    }
    let bound: f64 = params.iter().zip(gens).map(|(t, g)| t.abs() * g.norm_bound()).sum();
    let nodes = ((2.0 * bound).ceil() as usize + 8).min(64);
    let rule = GaussLegendre::new(NonZeroUsize::new(nodes).expect("at least eight nodes"));
    let psi = ucc_state(params, gens, reference, plan)?;
    let hpsi = StateVector::from_raw(psi.n_qubits(), h.apply(psi.amplitudes()));
    let scaled = |f: f64| -> Vec<f64> { params.iter().map(|t| f * t).collect() };
    let per_node: Vec<Vec<f64>> = rule
        .as_node_weight_pairs()
        .par_iter()
        .map(|&(x, w)| -> Result<Vec<f64>> {
            let s = 0.5 * (x + 1.0);
            let phi = ucc_state(&scaled(s), gens, reference, plan)?;
            let lambda = ucc_state(&scaled(s - 1.0), gens, &hpsi, plan)?;
            Ok(gens
                .iter()
                .map(|g| w * linalg::dot(lambda.amplitudes(), &g.apply(phi.amplitudes())).re)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; params.len()];
    for node in per_node {
        for (acc, v) in grad.iter_mut().zip(node) {
            *acc += v;
        }
    }
    Ok(grad)
}

/// Commutator expectations `⟨ψ|[H, τ_u]|ψ⟩` over the pool.
pub fn pre_estimated_gradients(
    state: &StateVector,
    h: &Observable,
    pool: &[PoolGenerator],
) -> Result<Vec<f64>> {
    let hpsi = h.apply(state.amplitudes());
    pool.par_iter()
        .map(|g| {
            let tpsi = g.generator.apply(state.amplitudes());
            let thpsi = g.generator.apply(&hpsi);
            let value = linalg::dot(&hpsi, &tpsi) - linalg::dot(state.amplitudes(), &thpsi);
            if value.im.abs() > IMAG_RESIDUE_TOL {
                return Err(Error::Numerical(format!(
                    "commutator expectation of {} has imaginary part {:.3e}",
                    g.name(),
                    value.im
                )));
            }
            Ok(value.re)
        })
        .collect()
}

/// Indices of the `count` largest `|r|`, ties broken by lower index.
fn select(gradients: &[f64], count: usize, exclude: &[usize]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..gradients.len()).filter(|i| !exclude.contains(i)).collect();
    idx.sort_by(|&a, &b| gradients[b].abs().total_cmp(&gradients[a].abs()).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

/// The ADAPT-VQE loop: grow the product ansatz by the largest pool
/// gradients until their 2-norm falls below `epsilon`.
pub fn adapt_vqe(
    h: &Observable,
    pool: &[PoolGenerator],
    reference: &StateVector,
    cfg: &AdaptConfig,
) -> Result<AnsatzTrace> {
    cfg.validate()?;
    if pool.is_empty() {
        return Err(Error::invalid("ADAPT needs a nonempty pool"));
    }
    let plan = EvolutionPlan::exact();
    let mut trace = AnsatzTrace {
        generator_ids: Vec::new(),
        parameters: Vec::new(),
        energy_history: vec![h.expectation(reference)?],
        residual_norm_history: Vec::new(),
        energy: 0.0,
        iterations: 0,
        converged: false,
    };
    let mut state = reference.clone();
    loop {
        let grads = pre_estimated_gradients(&state, h, pool)?;
        let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
        trace.residual_norm_history.push(norm);
        log::info!(
            "ADAPT iteration {}: gradient norm {:.3e}, {} parameters",
            trace.iterations,
            norm,
            trace.parameters.len()
        );
        if norm < cfg.epsilon {
            trace.converged = true;
            break;
        }
        if trace.iterations >= cfg.max_iterations {
            log::warn!("ADAPT stopped at the iteration limit with gradient norm {norm:.3e}");
            break;
        }
        let exclude = if cfg.readmit { Vec::new() } else { trace.generator_ids.clone() };
        let chosen = select(&grads, cfg.batch, &exclude);
        if chosen.is_empty() {
            log::warn!("ADAPT ran out of admissible generators");
            break;
        }
        for id in chosen {
            trace.generator_ids.push(id);
            trace.parameters.push(0.0);
        }
        let gens = trace.generators(pool);
        let res = minimize(
            h,
            AnsatzForm::Product,
            &gens,
            &trace.parameters,
            reference,
            &plan,
            &cfg.optimizer,
        )?;
        trace.parameters = res.params;
        trace.energy_history.push(res.energy);
        trace.iterations += 1;
        state = product_state(&trace.parameters, &gens, reference)?;
    }
    trace.energy = *trace.energy_history.last().expect("history starts nonempty");
    Ok(trace)
}

/// UCC-VQE over a whole pool from zero amplitudes.
pub fn ucc_vqe(
    h: &Observable,
    pool: &[PoolGenerator],
    reference: &StateVector,
    plan: &EvolutionPlan,
    optimizer: &OptimizerSettings,
) -> Result<VqeResult> {
    let gens: Vec<&Generator> = pool.iter().map(|g| &g.generator).collect();
    minimize(
        h,
        AnsatzForm::Ucc,
        &gens,
        &vec![0.0; gens.len()],
        reference,
        plan,
        optimizer,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_qubit_hamiltonian, build_ssh_hubbard, OrbitalBasis, ReferenceDeterminant};
    use crate::ops::{build_pool, PoolKind};
    use crate::state::prepare_reference;

    const DIMER_FCI: f64 = -0.8284271247461903;

    fn dimer() -> (Observable, Vec<PoolGenerator>, Vec<PoolGenerator>, StateVector) {
        let ints = build_ssh_hubbard(1, 1.0, 0.0, 4.0, OrbitalBasis::Band);
        let r = ReferenceDeterminant::aufbau(&ints).unwrap();
        let h = Observable::new(build_qubit_hamiltonian(&ints).unwrap()).unwrap();
        let sd = build_pool(&ints, PoolKind::SD, &r).unwrap();
        let gsd = build_pool(&ints, PoolKind::GSD, &r).unwrap();
        (h, sd, gsd, prepare_reference(&r, 4).unwrap())
    }

    #[test]
    fn presets() {
        assert_eq!(preset_epsilon("ADAPT(3)").unwrap(), 1e-3);
        assert_eq!(preset_epsilon("ADAPT(X)").unwrap(), 2e-4);
        assert!(preset_epsilon("ADAPT").is_err());
        assert!(AdaptConfig::with_epsilon(-1.0).is_err());
    }

    #[test]
    fn dimer_uccsd_is_exact() {
        let (h, sd, _, r) = dimer();
        let res = ucc_vqe(&h, &sd, &r, &EvolutionPlan::exact(), &OptimizerSettings::default()).unwrap();
        assert!((res.energy - DIMER_FCI).abs() < 1e-8, "{}", res.energy);
    }

    #[test]
    fn dimer_adapt_is_exact() {
        let (h, _, gsd, r) = dimer();
        let trace = adapt_vqe(&h, &gsd, &r, &AdaptConfig::with_epsilon(1e-3).unwrap()).unwrap();
        assert!(trace.converged);
        assert!((trace.energy - DIMER_FCI).abs() < 1e-6);
        for w in trace.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn huge_epsilon_stops_immediately() {
        let (h, _, gsd, r) = dimer();
        let trace = adapt_vqe(&h, &gsd, &r, &AdaptConfig::with_epsilon(1e3).unwrap()).unwrap();
        assert_eq!(trace.iterations, 0);
        assert!(trace.generator_ids.is_empty());
        assert_eq!(trace.energy, h.expectation(&r).unwrap());
    }

    #[test]
    fn largest_reference_gradient_is_a_double() {
        let (h, _, gsd, r) = dimer();
        let g = pre_estimated_gradients(&r, &h, &gsd).unwrap();
        let best = select(&g, 1, &[])[0];
        assert_eq!(gsd[best].rank, crate::ops::ExcitationRank::Double);
    }

    #[test]
    fn analytic_matches_finite_difference() {
        let (h, _, gsd, r) = dimer();
        let gens: Vec<&Generator> = gsd.iter().map(|g| &g.generator).collect();
        let params: Vec<f64> = (0..gens.len()).map(|i| 0.3 * ((i as f64) * 1.7).sin()).collect();
        let plan = EvolutionPlan::exact();
        let a = analytic_gradient(&h, &gens, &params, &r, &plan).unwrap();
        let f = finite_difference_gradient(
            |x| energy(&h, AnsatzForm::Product, x, &gens, &r, &plan).unwrap(),
            &params,
            FD_STEP,
        );
        for (x, y) in a.iter().zip(&f) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn ucc_quadrature_matches_finite_difference() {
        let ints = build_ssh_hubbard(2, 1.0, 0.6, 4.0, OrbitalBasis::Band);
        let r = ReferenceDeterminant::aufbau(&ints).unwrap();
        let h = Observable::new(build_qubit_hamiltonian(&ints).unwrap()).unwrap();
        let pool = build_pool(&ints, PoolKind::GSD, &r).unwrap();
        let psi = prepare_reference(&r, ints.n_qubits()).unwrap();
        let gens: Vec<&Generator> = pool.iter().map(|g| &g.generator).collect();
        let params: Vec<f64> = (0..gens.len()).map(|i| 0.4 * ((i as f64) * 0.9).cos()).collect();
        let plan = EvolutionPlan::exact();
        let a = ucc_gradient(&h, &gens, &params, &psi, &plan).unwrap();
        let f = finite_difference_gradient(
            |x| energy(&h, AnsatzForm::Ucc, x, &gens, &psi, &plan).unwrap(),
            &params,
            FD_STEP,
        );
        for (x, y) in a.iter().zip(&f) {
            assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn select_breaks_ties_by_id() {
        assert_eq!(select(&[0.5, -0.5, 0.1], 2, &[]), vec![0, 1]);
        assert_eq!(select(&[0.5, -0.5, 0.1], 2, &[0]), vec![1, 2]);
    }
}
