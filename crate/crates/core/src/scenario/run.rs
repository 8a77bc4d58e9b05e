//! Execution of a validated scenario.

use crate::chains::{
    ensemble_update, improper_mixture, max_off_diagonal_block, monte_carlo_update_sharded, world_branches,
    BranchComponent, BranchDecomposition, WeightedEnsemble,
};
use crate::error::Error;
use crate::hilbert::{embed_operator_on, partial_trace, DensityOperator, StateRef, StateVector};
use crate::linalg;
use crate::premeasurement::{branch_decomposition, PremeasurementKind, CHECK_TOLERANCE};
use crate::random::derive_seed;
use crate::tolerance::Tolerances;

use super::parse::{Analysis, Scenario};
use super::report::*;

/// Monte Carlo shards; fixed so that results do not depend on the thread count.
const MONTE_CARLO_SHARDS: usize = 8;
const CONDITION_SEED_STREAM: u64 = 0x1000;
const MONTE_CARLO_SEED_STREAM: u64 = 0x2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    /// Pass threshold of the condition checks.
    pub tolerance: f64,
    pub dump_states: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            tolerance: CHECK_TOLERANCE,
            dump_states: false,
        }
    }
}

/// A library error raised while running, with the stage or analysis it came from.
#[derive(Debug, thiserror::Error)]
#[error("{context}: {source}")]
pub struct RunError {
    pub context: String,
    #[source]
    pub source: Error,
}

fn at(context: String) -> impl FnOnce(Error) -> RunError {
    move |source| RunError { context, source }
}

type Members = Vec<(f64, StateVector)>;

pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<RunReport, RunError> {
    let tol = Tolerances::default();
    let layout = scenario.layout();
    let mut history: Vec<Members> = vec![scenario.initial().to_vec()];
    let mut stage_rows = Vec::new();
    let mut max_unitarity: f64 = 0.0;
    let mut max_norm: f64 = 0.0;
    for (i, pm) in scenario.stages().iter().enumerate() {
        let ctx = || format!("stage {i}");
        let u = embed_operator_on(pm.unitary(), &pm.layout().labels(), layout).map_err(at(ctx()))?;
        let unitarity = linalg::unitarity_residual(pm.unitary());
        max_unitarity = max_unitarity.max(unitarity);
        let next = history
            .last()
            .unwrap()
            .iter()
            .map(|(w, s)| {
                let v = &u * s.amplitudes();
                max_norm = max_norm.max((v.norm() - 1.0).abs());
                StateVector::new(layout.clone(), v).map(|s| (*w, s))
            })
            .collect::<crate::error::Result<Members>>()
            .map_err(at(ctx()))?;
        history.push(next);
        stage_rows.push(StageRow {
            stage: i,
            object: pm.object_label(),
            instrument: pm.instrument_label(),
            kind: match pm.kind() {
                PremeasurementKind::Ideal => "ideal",
                PremeasurementKind::Exact => "exact",
                PremeasurementKind::Custom => "custom",
            }
            .to_string(),
            outcomes: pm.measured().len(),
            unitarity_residual: unitarity,
        });
    }
    let after = |t: usize| &history[t + 1];
    let last = history.last().unwrap();

    let mut sections = Vec::new();
    for (a, analysis) in scenario.analyses().iter().enumerate() {
        let ctx = |what: &str| format!("analysis {a} ({what})");
        let section = match analysis {
            Analysis::Branches { stage } => {
                let pm = &scenario.stages()[*stage];
                let state = &after(*stage)[0].1;
                let d = branch_decomposition(state, pm.pointer(), &tol).map_err(at(ctx("branches")))?;
                Section::Branches {
                    stage: *stage,
                    pointer: pm.instrument_label(),
                    table: weight_table(&d),
                }
            }
            Analysis::ImproperMixture { stage, coherence } => {
                let pm = &scenario.stages()[*stage];
                let pointer_label = pm.instrument_label();
                let rho;
                let state: StateRef = if last.len() == 1 {
                    StateRef::Pure(&last[0].1)
                } else {
                    rho = mixture(last).map_err(at(ctx("improper_mixture")))?;
                    StateRef::Mixed(&rho)
                };
                let global_purity = linalg::purity(&state.density_matrix());
                let d = improper_mixture(state, &pm.pointer().decomposition(), &tol)
                    .map_err(at(ctx("improper_mixture")))?;
                let reduced = partial_trace(state, &[pointer_label.as_str()]).map_err(at(ctx("improper_mixture")))?;
                let off_diagonal = coherence
                    .map(|c| max_off_diagonal_block(&reduced, scenario.stages()[c].pointer()))
                    .transpose()
                    .map_err(at(ctx("improper_mixture")))?;
                Section::ImproperMixture {
                    pointer: pointer_label,
                    reduced: reduced.layout().joined_label(),
                    table: weight_table(&d),
                    global_purity,
                    reduced_purity: reduced.purity(),
                    coherence_stage: *coherence,
                    max_off_diagonal_block: off_diagonal,
                }
            }
            Analysis::WorldBranches { stage } => {
                let pm = &scenario.stages()[*stage];
                let d = world_branches(&last[0].1, pm.pointer(), &tol).map_err(at(ctx("world_branches")))?;
                let range = d.pairwise_trace_distance_range();
                Section::WorldBranches {
                    pointer: pm.instrument_label(),
                    relative_to: d
                        .branches
                        .first()
                        .map(|b| b.component.layout().joined_label())
                        .unwrap_or_default(),
                    table: weight_table(&d),
                    min_trace_distance: range.map(|r| r.0),
                    max_trace_distance: range.map(|r| r.1),
                }
            }
            Analysis::EnsembleUpdate { event, monte_carlo } => {
                let ens = WeightedEnsemble::new(last.clone()).map_err(at(ctx("ensemble_update")))?;
                let r = ensemble_update(&ens, event, &tol).map_err(at(ctx("ensemble_update")))?;
                let rows = r
                    .members
                    .iter()
                    .map(|m| WeightRow {
                        k: m.index,
                        weight: m.weight,
                        summary: format!(
                            "prior={:.6} q={:.6} purity={:.6}",
                            m.prior_weight,
                            m.occurrence_probability,
                            m.conditional.purity()
                        ),
                    })
                    .collect();
                let mc = monte_carlo
                    .map(|n| {
                        let seed = derive_seed(options.seed, MONTE_CARLO_SEED_STREAM + a as u64);
                        monte_carlo_update_sharded(&ens, event, n, seed, MONTE_CARLO_SHARDS).map(|mc| {
                            let weights = mc.weights();
                            let accepted = mc.n_accepted();
                            let max_standard_errors = weights
                                .iter()
                                .enumerate()
                                .map(|(k, w_hat)| {
                                    let w = r.weight_of(k);
                                    let se = (w * (1.0 - w) / accepted as f64).sqrt();
                                    if se > 0.0 {
                                        (w_hat - w).abs() / se
                                    } else {
                                        0.0
                                    }
                                })
                                .fold(0.0, f64::max);
                            MonteCarloRow {
                                samples: n,
                                accepted,
                                weights,
                                max_standard_errors,
                            }
                        })
                    })
                    .transpose()
                    .map_err(at(ctx("ensemble_update")))?;
                Section::EnsembleUpdate {
                    event_on: event.support().joined_label(),
                    occurrence_probability: r.occurrence_probability,
                    table: WeightTable::new(rows, 0.0),
                    dropped_members: r.dropped.clone(),
                    aggregate_on: r.aggregate.layout().joined_label(),
                    aggregate_purity: r.aggregate.purity(),
                    monte_carlo: mc,
                }
            }
            Analysis::ConditionReports { trials } => {
                let stages = scenario
                    .stages()
                    .iter()
                    .enumerate()
                    .map(|(i, pm)| {
                        let seed = derive_seed(options.seed, CONDITION_SEED_STREAM + i as u64);
                        let reports = pm
                            .check_all(*trials, seed)
                            .into_iter()
                            .map(|r| r.with_tolerance(options.tolerance))
                            .collect();
                        StageConditions { stage: i, reports }
                    })
                    .collect();
                Section::ConditionReports { trials: *trials, stages }
            }
        };
        sections.push(section);
    }

    let max_weight_deviation = sections
        .iter()
        .filter_map(Section::table)
        .map(|t| (t.total - 1.0).abs())
        .fold(0.0, f64::max);
    let states = options.dump_states.then(|| {
        history
            .iter()
            .enumerate()
            .map(|(i, members)| StateDump {
                after_stage: i.checked_sub(1),
                members: members
                    .iter()
                    .map(|(w, s)| MemberDump {
                        weight: *w,
                        amplitudes: s.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
                    })
                    .collect(),
            })
            .collect()
    });
    Ok(RunReport {
        scenario: scenario.name().to_string(),
        seed: options.seed,
        tolerance: options.tolerance,
        layout: layout
            .subsystems()
            .iter()
            .map(|s| LayoutRow {
                label: s.label.clone(),
                dim: s.dim,
            })
            .collect(),
        stages: stage_rows,
        sections,
        residuals: Residuals {
            max_unitarity,
            max_norm_deviation: max_norm,
            max_weight_deviation,
        },
        states,
    })
}

fn mixture(members: &Members) -> crate::error::Result<DensityOperator> {
    DensityOperator::from_mixture(members.iter().map(|(w, s)| (*w, s)))
}

fn weight_table(d: &BranchDecomposition) -> WeightTable {
    let rows = d
        .branches
        .iter()
        .map(|b| WeightRow {
            k: b.index,
            weight: b.weight,
            summary: summarize(&b.component),
        })
        .collect();
    WeightTable::new(rows, d.dropped_weight)
}

/// Dominant product-basis ket of a pure component, purity of a mixed one.
fn summarize(component: &BranchComponent) -> String {
    match component {
        BranchComponent::Pure(s) => {
            let (index, p) = s
                .amplitudes()
                .iter()
                .map(|z| z.norm_sqr())
                .enumerate()
                .fold((0, -1.0), |best, (i, p)| if p > best.1 { (i, p) } else { best });
            let digits: Vec<String> = s
                .layout()
                .strides()
                .iter()
                .zip(s.layout().dims())
                .map(|(stride, dim)| ((index / stride) % dim).to_string())
                .collect();
            format!("|{}> p={:.6}", digits.join(","), p)
        }
        BranchComponent::Mixed(rho) => format!("purity={:.6}", rho.purity()),
    }
}
