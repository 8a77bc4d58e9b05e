//! Randomised property suites over a grid of object and instrument
//! dimensions, with optional fault injection.

use std::fmt::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{
    conditional_state, ensemble_update, improper_mixture, max_off_diagonal_block, relative_state_forms,
    run_two_link_chain, tripartite_conditional_consistency, ConditionalForm, WeightedEnsemble,
};
use crate::error::Result;
use crate::hilbert::{partial_trace, DensityOperator, StateVector, SubsystemBasis, SubsystemLayout};
use crate::linalg::{basis_vector, kron_vec, CMatrix, CVector};
use crate::observables::{DecompositionOfIdentity, Projector};
use crate::premeasurement::{branch_decomposition, luders_state, Premeasurement, CHECK_TOLERANCE};
use crate::random::{self, SimRng};
use crate::tolerance::Tolerances;

/// Condition-check trials inside one premeasurement case.
const CHECKS_PER_CASE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    #[default]
    None,
    /// Every generated premeasurement is replaced by [`Premeasurement::phase_swapped`].
    Phase,
}

impl FromStr for Corruption {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(Corruption::None),
            "phase" => Ok(Corruption::Phase),
            other => Err(format!("unknown corruption mode `{other}` (expected none or phase)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Object dimensions run over `2..=max_object_dim`.
    pub max_object_dim: usize,
    /// Instrument dimensions run over `2..=max_instrument_dim`.
    pub max_instrument_dim: usize,
    /// Cases per suite, spread round-robin over the grid.
    pub trials: usize,
    pub seed: u64,
    pub corrupt: Corruption,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_object_dim: 4,
            max_instrument_dim: 6,
            trials: 100,
            seed: 0,
            corrupt: Corruption::None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// First library error raised by a case, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub grid: Vec<[usize; 2]>,
    pub trials: usize,
    pub seed: u64,
    pub corrupt: Corruption,
    pub suites: Vec<SuiteResult>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

type Case = fn(&mut SimRng, usize, usize, Corruption) -> Result<f64>;

const SUITES: &[(&str, f64, Case)] = &[
    ("premeasurement_conditions", CHECK_TOLERANCE, premeasurement_conditions),
    ("ideal_definitions", 1e-10, ideal_definitions),
    ("born_rule_branches", 1e-10, born_rule_branches),
    ("relative_state_forms", 1e-10, relative_forms),
    ("conditional_forms", 1e-10, conditional_forms),
    ("chain_decoherence", 1e-10, chain_decoherence),
    ("proper_mixture_absoluteness", 1e-12, proper_mixture_absoluteness),
    ("improper_mixture_resummation", 1e-10, improper_mixture_resummation),
    ("ensemble_decomposition_invariance", 1e-10, ensemble_invariance),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

pub fn verify(options: &VerifyOptions) -> VerifyReport {
    match options.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(|| verify_in_pool(options)))
            .unwrap_or_else(|_| verify_in_pool(options)),
        None => verify_in_pool(options),
    }
}

fn verify_in_pool(options: &VerifyOptions) -> VerifyReport {
    let grid: Vec<[usize; 2]> = (2..=options.max_object_dim)
        .flat_map(|a| (2..=options.max_instrument_dim).map(move |b| [a, b]))
        .collect();
    let mut warnings = Vec::new();
    if options.trials == 0 {
        warnings.push("trials = 0: every suite is empty".to_string());
    }
    if grid.is_empty() {
        warnings.push("empty dimension grid: every suite is empty".to_string());
    }
    let trials = if grid.is_empty() { 0 } else { options.trials };
    let suites: Vec<SuiteResult> = SUITES
        .iter()
        .enumerate()
        .map(|(s, (name, tolerance, case))| {
            let outcomes: Vec<Result<f64>> = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let [a, b] = grid[i % grid.len()];
                    let mut rng = random::rng(random::derive_seed(options.seed, ((s as u64) << 32) | i as u64));
                    case(&mut rng, a, b, options.corrupt)
                })
                .collect();
            let mut max_residual: f64 = 0.0;
            let mut failures = 0;
            let mut error = None;
            for outcome in outcomes {
                match outcome {
                    Ok(r) if r <= *tolerance => max_residual = max_residual.max(r),
                    Ok(r) => {
                        failures += 1;
                        max_residual = max_residual.max(if r.is_nan() { f64::INFINITY } else { r });
                    }
                    Err(e) => {
                        failures += 1;
                        max_residual = f64::INFINITY;
                        error.get_or_insert_with(|| e.to_string());
                    }
                }
            }
            SuiteResult {
                name: name.to_string(),
                cases: trials,
                failures,
                max_residual,
                tolerance: *tolerance,
                pass: failures == 0,
                error,
            }
        })
        .collect();
    let pass = suites.iter().all(|s| s.pass);
    VerifyReport {
        grid,
        trials: options.trials,
        seed: options.seed,
        corrupt: options.corrupt,
        suites,
        warnings,
        pass,
    }
}

impl VerifyReport {
    /// 0 when every suite passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            2
        }
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialise")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let width = self.suites.iter().map(|s| s.name.len()).max().unwrap_or(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>8}  {:>12}  {:>9}  result",
            "suite", "cases", "failures", "max_residual", "tolerance"
        );
        for s in &self.suites {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>8}  {:>12.3e}  {:>9.0e}  {}",
                s.name,
                s.cases,
                s.failures,
                s.max_residual,
                s.tolerance,
                if s.pass { "pass" } else { "FAIL" }
            );
            if let Some(e) = &s.error {
                let _ = writeln!(out, "  first error: {e}");
            }
        }
        let _ = writeln!(out, "summary {}", self.summary_json());
        out
    }
}

fn qudit(label: &str, d: usize) -> Result<SubsystemLayout> {
    SubsystemLayout::single(label, d)
}

fn random_state(rng: &mut SimRng, layout: SubsystemLayout) -> Result<StateVector> {
    let d = layout.total_dim();
    StateVector::new(layout, random::unit_vector(rng, d))
}

fn corrupt(pm: Premeasurement, mode: Corruption) -> Result<Premeasurement> {
    match mode {
        Corruption::None => Ok(pm),
        Corruption::Phase => pm.phase_swapped(),
    }
}

fn random_exact(rng: &mut SimRng, a: usize, b: usize, mode: Corruption) -> Result<Premeasurement> {
    let ideal = Premeasurement::random_ideal(rng, a, b)?;
    let dressings = ideal.random_dressings(rng);
    corrupt(Premeasurement::exact(&ideal, &dressings)?, mode)
}

fn premeasurement_conditions(rng: &mut SimRng, a: usize, b: usize, mode: Corruption) -> Result<f64> {
    let pm = random_exact(rng, a, b, mode)?;
    let seed = rng.random();
    Ok(pm
        .check_all(CHECKS_PER_CASE, seed)
        .iter()
        .map(|r| r.max_residual)
        .fold(0.0, f64::max))
}

/// Residuals of the expansion form, the Lüders reduced state and the
/// fixity of sharp states, for one ideal premeasurement.
fn ideal_definitions(rng: &mut SimRng, a: usize, b: usize, mode: Corruption) -> Result<f64> {
    let pm = corrupt(Premeasurement::random_ideal(rng, a, b)?, mode)?;
    let phi = random_state(rng, qudit("A", a)?)?;
    let out = pm.evolve(&phi)?;
    let states = pm.pointer_states();
    let expansion = pm
        .measured()
        .branches()
        .iter()
        .enumerate()
        .fold(CVector::zeros(a * b), |acc, (k, br)| {
            acc + kron_vec(&(br.projector.matrix() * phi.amplitudes()), &states[k])
        });
    let mut worst = (out.amplitudes() - expansion).norm();
    let reduced = partial_trace(&out, &["B"])?;
    worst = worst.max((reduced.matrix() - luders_state(&phi, pm.measured())?.matrix()).norm());
    for (k, br) in pm.measured().branches().iter().enumerate() {
        let v = br.projector.matrix() * random::gaussian_vector(rng, a);
        let sharp = StateVector::new(qudit("A", a)?, v.unscale(v.norm()))?;
        let fixed = kron_vec(sharp.amplitudes(), &states[k]);
        worst = worst.max((pm.evolve(&sharp)?.amplitudes() - fixed).norm());
    }
    Ok(worst)
}

fn born_rule_branches(rng: &mut SimRng, a: usize, b: usize, mode: Corruption) -> Result<f64> {
    let pm = random_exact(rng, a, b, mode)?;
    let phi = random_state(rng, qudit("A", a)?)?;
    let d = branch_decomposition(&pm.evolve(&phi)?, pm.pointer(), &Tolerances::default())?;
    let mut worst = (d.total_weight() + d.dropped_weight - 1.0).abs();
    for (k, br) in pm.measured().branches().iter().enumerate() {
        let born = phi.amplitudes().dotc(&(br.projector.matrix() * phi.amplitudes())).re;
        let w = d.branch(pm.index_map()[k]).map_or(0.0, |x| x.weight);
        worst = worst.max((born - w).abs());
    }
    Ok(worst)
}

fn relative_forms(rng: &mut SimRng, a: usize, b: usize, _: Corruption) -> Result<f64> {
    let psi = random_state(rng, SubsystemLayout::new([("A", a), ("B", b)])?)?;
    let phi = random::unit_vector(rng, b);
    Ok(relative_state_forms(&psi, "B", &phi, &Tolerances::default())?.max_disagreement())
}

fn conditional_forms(rng: &mut SimRng, a: usize, b: usize, _: Corruption) -> Result<f64> {
    let tol = Tolerances::default();
    let layout = SubsystemLayout::new([("A", a), ("B", b)])?;
    let rank = rng.random_range(1..=a * b);
    let rho = DensityOperator::new(layout, random::density_matrix(rng, a * b, rank))?;
    let p_rank = rng.random_range(1..=b);
    let p = Projector::new(qudit("B", b)?, random::projector(rng, b, p_rank))?;
    let plain = conditional_state(&rho, &p, ConditionalForm::Plain, &tol)?;
    let sandwich = conditional_state(&rho, &p, ConditionalForm::Sandwich, &tol)?;
    let mut worst = (plain.matrix() - sandwich.matrix()).norm();

    let ensemble = WeightedEnsemble::from_density(&rho, &tol)?;
    let updated = ensemble_update(&ensemble, &p, &tol)?;
    worst = worst.max((updated.aggregate.matrix() - sandwich.matrix()).norm());

    let tri_layout = SubsystemLayout::new([("A", a), ("B", b), ("C", 2)])?;
    let rho3 = DensityOperator::new(tri_layout, random::density_matrix(rng, a * b * 2, 3))?;
    let (via_all, via_reduced) = tripartite_conditional_consistency(&rho3, &p, &["C"], &tol)?;
    Ok(worst.max((via_all.matrix() - via_reduced.matrix()).norm()))
}

/// Second link registers the first pointer in a fresh instrument `C`; the
/// `A+B` state loses its pointer coherences while `A+B+C` stays pure.
fn chain_decoherence(rng: &mut SimRng, a: usize, b: usize, mode: Corruption) -> Result<f64> {
    let pm1 = corrupt(Premeasurement::random_ideal(rng, a, b)?, mode)?;
    let k = pm1.pointer().len();
    let states: Vec<CVector> = (0..k).map(|j| basis_vector(k, j)).collect();
    let c_pointer = crate::observables::SpectralObservable::pointer_for_states(qudit("C", k)?, &states)?;
    let basis = SubsystemBasis::new("C", k, states)?;
    let ready = StateVector::basis(qudit("C", k)?, 0)?;
    let pm2 = Premeasurement::ideal(pm1.pointer().clone(), c_pointer, &basis, ready)?;
    let phi = random_state(rng, qudit("A", a)?)?;
    let (_, fin) = run_two_link_chain(&pm1, &pm2, &phi)?;
    let rho_ab = partial_trace(&fin, &["C"])?;
    let off = max_off_diagonal_block(&rho_ab, pm1.pointer())?;
    Ok(off.max((fin.density()?.purity() - 1.0).abs()))
}

fn proper_mixture_absoluteness(rng: &mut SimRng, a: usize, b: usize, mode: Corruption) -> Result<f64> {
    let pm = random_exact(rng, a, b, mode)?;
    let phi = random_state(rng, qudit("A", a)?)?;
    let branches = branch_decomposition(&pm.evolve(&phi)?, pm.pointer(), &Tolerances::default())?;
    let proper = branches.proper_mixture()?;
    let rho_c = DensityOperator::new(qudit("C", 2)?, random::density_matrix(rng, 2, 2))?;
    let back = partial_trace(&proper.tensor(&rho_c)?, &["C"])?;
    Ok((back.matrix() - proper.matrix()).norm())
}

fn improper_mixture_resummation(rng: &mut SimRng, a: usize, b: usize, _: Corruption) -> Result<f64> {
    let layout = SubsystemLayout::new([("A", a), ("B", b)])?;
    let rank = rng.random_range(1..=a * b);
    let rho = DensityOperator::new(layout, random::density_matrix(rng, a * b, rank))?;
    let blocks = rng.random_range(1..=b);
    let d = DecompositionOfIdentity::new(qudit("B", b)?, random::decomposition_of_identity(rng, b, blocks))?;
    let mix = improper_mixture(&rho, &d, &Tolerances::default())?;
    let reduced = partial_trace(&rho, &["B"])?;
    let resum = mix.resum().unwrap_or_else(|| CMatrix::zeros(a, a));
    Ok((resum - reduced.matrix())
        .norm()
        .max((mix.total_weight() + mix.dropped_weight - 1.0).abs()))
}

fn ensemble_invariance(rng: &mut SimRng, a: usize, b: usize, _: Corruption) -> Result<f64> {
    let tol = Tolerances::default();
    let layout = SubsystemLayout::new([("A", a), ("B", b)])?;
    let rank = rng.random_range(1..=(a * b).min(4));
    let rho = DensityOperator::new(layout, random::density_matrix(rng, a * b, rank))?;
    let eigen = WeightedEnsemble::from_density(&rho, &tol)?;
    let other = eigen.remix(&random::unitary(rng, eigen.len()), &tol)?;
    let p = Projector::new(qudit("B", b)?, random::projector(rng, b, 1))?;
    let x = ensemble_update(&eigen, &p, &tol)?;
    let y = ensemble_update(&other, &p, &tol)?;
    Ok((x.aggregate.matrix() - y.aggregate.matrix())
        .norm()
        .max((other.density()?.matrix() - rho.matrix()).norm()))
}
