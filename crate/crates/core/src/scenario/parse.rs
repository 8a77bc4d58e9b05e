//! Validation of scenario documents into runnable [`Scenario`]s.

use std::collections::HashSet;

use crate::error::Error;
use crate::hilbert::{StateVector, SubsystemBasis, SubsystemLayout};
use crate::linalg::{basis_vector, c, CMatrix, CVector, C64};
use crate::observables::{observable_from_matrix, Projector, SpectralObservable};
use crate::premeasurement::{Dressing, Premeasurement};
use crate::random;
use crate::tolerance::Tolerances;

use super::schema::*;

/// Amplitude lists may deviate from unit norm by this much before being rescaled.
const AMPLITUDE_NORM_SLACK: f64 = 1e-8;
const DEFAULT_CHECK_TRIALS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioErrorCode {
    Syntax,
    UnknownLabel,
    DimensionMismatch,
    MalformedState,
    EmptyStages,
    InvalidStage,
    InvalidAnalysis,
    InvalidLayout,
}

impl ScenarioErrorCode {
    pub fn code(self) -> &'static str {
        match self {
            ScenarioErrorCode::Syntax => "E001",
            ScenarioErrorCode::UnknownLabel => "E002",
            ScenarioErrorCode::DimensionMismatch => "E003",
            ScenarioErrorCode::MalformedState => "E004",
            ScenarioErrorCode::EmptyStages => "E005",
            ScenarioErrorCode::InvalidStage => "E006",
            ScenarioErrorCode::InvalidAnalysis => "E007",
            ScenarioErrorCode::InvalidLayout => "E008",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioErrorCode::Syntax => "syntax",
            ScenarioErrorCode::UnknownLabel => "unknown-label",
            ScenarioErrorCode::DimensionMismatch => "dimension-mismatch",
            ScenarioErrorCode::MalformedState => "malformed-state",
            ScenarioErrorCode::EmptyStages => "empty-stages",
            ScenarioErrorCode::InvalidStage => "invalid-stage",
            ScenarioErrorCode::InvalidAnalysis => "invalid-analysis",
            ScenarioErrorCode::InvalidLayout => "invalid-layout",
        }
    }
}

/// Validation diagnostic. `location` is `line L, column C` for syntax errors
/// and a field path such as `stages[1].instrument` otherwise.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("error[{} {}] at {location}: {message}", code.code(), code.name())]
pub struct ScenarioError {
    pub code: ScenarioErrorCode,
    pub location: String,
    pub message: String,
}

impl ScenarioError {
    fn new(code: ScenarioErrorCode, location: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError {
            code,
            location: location.into(),
            message: message.into(),
        }
    }
}

type Parsed<T> = std::result::Result<T, ScenarioError>;

fn lib_error(fallback: ScenarioErrorCode, location: &str) -> impl Fn(Error) -> ScenarioError + '_ {
    move |e| {
        let code = match e {
            Error::UnknownLabel(_) => ScenarioErrorCode::UnknownLabel,
            Error::DimensionMismatch { .. } | Error::InstrumentTooSmall { .. } => ScenarioErrorCode::DimensionMismatch,
            _ => fallback,
        };
        ScenarioError::new(code, location, e.to_string())
    }
}

/// A validated analysis request.
#[derive(Debug, Clone, PartialEq)]
pub enum Analysis {
    Branches { stage: usize },
    ImproperMixture { stage: usize, coherence: Option<usize> },
    WorldBranches { stage: usize },
    EnsembleUpdate { event: Projector, monte_carlo: Option<u64> },
    ConditionReports { trials: usize },
}

/// A fully validated scenario: the global layout, the initial global state
/// (one member for a pure start, several for a proper mixture), one
/// premeasurement per stage and the requested analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    doc: ScenarioDoc,
    layout: SubsystemLayout,
    initial: Vec<(f64, StateVector)>,
    stages: Vec<Premeasurement>,
    analyses: Vec<Analysis>,
}

impl Scenario {
    pub fn from_doc(doc: ScenarioDoc) -> Parsed<Self> {
        let layout = SubsystemLayout::new(doc.subsystems.iter().map(|s| (s.label.clone(), s.dim)))
            .map_err(lib_error(ScenarioErrorCode::InvalidLayout, "subsystems"))?;
        if doc.stages.is_empty() {
            return Err(ScenarioError::new(
                ScenarioErrorCode::EmptyStages,
                "stages",
                "a scenario needs at least one stage",
            ));
        }
        let stages = build_stages(&doc.stages, &layout)?;
        let initial = build_initial(&doc.initial, &layout, &stages)?;
        let pure = initial.len() == 1;
        let analyses = doc
            .analyses
            .iter()
            .enumerate()
            .map(|(i, a)| build_analysis(a, &format!("analyses[{i}]"), &layout, &stages, pure))
            .collect::<Parsed<_>>()?;
        Ok(Scenario {
            doc,
            layout,
            initial,
            stages,
            analyses,
        })
    }

    pub fn doc(&self) -> &ScenarioDoc {
        &self.doc
    }

    pub fn name(&self) -> &str {
        &self.doc.name
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn initial(&self) -> &[(f64, StateVector)] {
        &self.initial
    }

    pub fn stages(&self) -> &[Premeasurement] {
        &self.stages
    }

    pub fn analyses(&self) -> &[Analysis] {
        &self.analyses
    }
}

/// Parses and validates a JSON scenario document.
pub fn parse_scenario(text: &str) -> Parsed<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| {
        ScenarioError::new(
            ScenarioErrorCode::Syntax,
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    Scenario::from_doc(doc)
}

/// Pretty-printed document of a scenario; parsing it gives the same scenario.
pub fn emit_scenario(scenario: &Scenario) -> String {
    let mut s = serde_json::to_string_pretty(&scenario.doc).expect("scenario documents always serialise");
    s.push('\n');
    s
}

fn resolve_labels(labels: &[String], layout: &SubsystemLayout, location: &str) -> Parsed<SubsystemLayout> {
    if labels.is_empty() {
        return Err(ScenarioError::new(ScenarioErrorCode::InvalidStage, location, "empty subsystem list"));
    }
    for (i, l) in labels.iter().enumerate() {
        if !layout.contains(l) {
            return Err(ScenarioError::new(
                ScenarioErrorCode::UnknownLabel,
                format!("{location}[{i}]"),
                format!("undeclared subsystem `{l}`"),
            ));
        }
    }
    layout
        .select(labels)
        .map_err(lib_error(ScenarioErrorCode::InvalidStage, location))
}

pub(crate) fn state_vector(spec: &StateDoc, layout: &SubsystemLayout, location: &str) -> Parsed<StateVector> {
    let d = layout.total_dim();
    let malformed = |msg: String| ScenarioError::new(ScenarioErrorCode::MalformedState, location, msg);
    let mismatch = |msg: String| ScenarioError::new(ScenarioErrorCode::DimensionMismatch, location, msg);
    let amplitudes: CVector = match spec {
        StateDoc::Preset(name) => match name.as_str() {
            "plus" => CVector::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0)),
            "minus" => {
                if d < 2 {
                    return Err(mismatch(format!("`minus` needs dimension ≥ 2, got {d}")));
                }
                let s = 1.0 / (d as f64).sqrt();
                CVector::from_fn(d, |i, _| c(if i % 2 == 0 { s } else { -s }, 0.0))
            }
            "bell" => {
                let dims = layout.dims();
                if dims.len() != 2 || dims[0] != dims[1] {
                    return Err(mismatch(format!("`bell` needs two subsystems of equal dimension, got {dims:?}")));
                }
                let n = dims[0];
                let s = 1.0 / (n as f64).sqrt();
                (0..n).fold(CVector::zeros(d), |acc, k| acc + basis_vector(d, k * n + k).scale(s))
            }
            other => {
                let Some(k) = other.strip_prefix("basis:") else {
                    return Err(malformed(format!("unknown state preset `{other}`")));
                };
                let k: usize = k
                    .parse()
                    .map_err(|_| malformed(format!("`{other}`: basis index is not a non-negative integer")))?;
                if k >= d {
                    return Err(mismatch(format!("`{other}` in dimension {d}")));
                }
                basis_vector(d, k)
            }
        },
        StateDoc::Amplitudes(list) => {
            if list.len() != d {
                return Err(mismatch(format!("{} amplitudes for dimension {d}", list.len())));
            }
            let v = CVector::from_iterator(d, list.iter().map(complex));
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(malformed("non-finite amplitude".into()));
            }
            let norm = v.norm();
            if (norm - 1.0).abs() > AMPLITUDE_NORM_SLACK {
                return Err(malformed(format!("amplitudes have norm {norm}, expected 1")));
            }
            v.unscale(norm)
        }
    };
    StateVector::new(layout.clone(), amplitudes).map_err(lib_error(ScenarioErrorCode::MalformedState, location))
}

fn complex(z: &ComplexDoc) -> C64 {
    match *z {
        ComplexDoc::Pair([re, im]) => c(re, im),
        ComplexDoc::Real(re) => c(re, 0.0),
    }
}

fn matrix(doc: &MatrixDoc, dim: usize, location: &str) -> Parsed<CMatrix> {
    if doc.len() != dim || doc.iter().any(|row| row.len() != dim) {
        return Err(ScenarioError::new(
            ScenarioErrorCode::DimensionMismatch,
            location,
            format!("expected a {dim}×{dim} matrix"),
        ));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| complex(&doc[i][j])))
}

fn build_stages(docs: &[StageDoc], layout: &SubsystemLayout) -> Parsed<Vec<Premeasurement>> {
    let tol = Tolerances::default();
    let mut touched: HashSet<&str> = HashSet::new();
    let mut stages: Vec<Premeasurement> = Vec::with_capacity(docs.len());
    for (i, doc) in docs.iter().enumerate() {
        let at = |field: &str| format!("stages[{i}].{field}");
        let invalid = |field: &str, msg: String| ScenarioError::new(ScenarioErrorCode::InvalidStage, at(field), msg);
        let object = resolve_labels(&doc.object, layout, &at("object"))?;
        if !layout.contains(&doc.instrument) {
            return Err(ScenarioError::new(
                ScenarioErrorCode::UnknownLabel,
                at("instrument"),
                format!("undeclared subsystem `{}`", doc.instrument),
            ));
        }
        if doc.object.contains(&doc.instrument) {
            return Err(invalid("instrument", format!("`{}` cannot measure itself", doc.instrument)));
        }
        if touched.contains(doc.instrument.as_str()) {
            return Err(invalid(
                "instrument",
                format!("`{}` is acted on by an earlier stage and is no longer ready", doc.instrument),
            ));
        }
        let instrument = SubsystemLayout::single(doc.instrument.clone(), layout.dim_of(&doc.instrument).unwrap())
            .map_err(lib_error(ScenarioErrorCode::InvalidStage, &at("instrument")))?;
        let d_obj = object.total_dim();
        let d_ins = instrument.total_dim();

        let measured_at = at("measured");
        let measured = match &doc.measured {
            ObservableDoc::Diagonal(values) => {
                if values.len() != d_obj {
                    return Err(ScenarioError::new(
                        ScenarioErrorCode::DimensionMismatch,
                        measured_at,
                        format!("{} diagonal entries for object dimension {d_obj}", values.len()),
                    ));
                }
                SpectralObservable::diagonal(object.clone(), values)
            }
            ObservableDoc::Matrix(m) => {
                observable_from_matrix(object.clone(), &matrix(m, d_obj, &measured_at)?, tol.eig)
            }
            ObservableDoc::PointerOfStage(t) => {
                let Some(earlier) = stages.get(*t) else {
                    return Err(invalid("measured", format!("stage {t} does not precede stage {i}")));
                };
                let label = earlier.instrument_label();
                if !doc.object.contains(&label) {
                    return Err(invalid(
                        "measured",
                        format!("object must include `{label}` to measure the pointer of stage {t}"),
                    ));
                }
                earlier.pointer().embed_into(&object)
            }
        }
        .map_err(lib_error(ScenarioErrorCode::InvalidStage, &measured_at))?;
        let k = measured.len();
        if k > d_ins {
            return Err(ScenarioError::new(
                ScenarioErrorCode::DimensionMismatch,
                at("instrument"),
                format!("instrument of dimension {d_ins} cannot register {k} outcomes"),
            ));
        }

        let pointer_states: Vec<CVector> = match &doc.pointer_states {
            Some(specs) => {
                if specs.len() != k {
                    return Err(ScenarioError::new(
                        ScenarioErrorCode::DimensionMismatch,
                        at("pointer_states"),
                        format!("{} pointer states for {k} measured outcomes", specs.len()),
                    ));
                }
                specs
                    .iter()
                    .enumerate()
                    .map(|(j, s)| {
                        state_vector(s, &instrument, &format!("stages[{i}].pointer_states[{j}]"))
                            .map(StateVector::into_amplitudes)
                    })
                    .collect::<Parsed<_>>()?
            }
            None => (0..k).map(|j| basis_vector(d_ins, j)).collect(),
        };
        let basis = SubsystemBasis::new(doc.instrument.clone(), d_ins, pointer_states)
            .map_err(lib_error(ScenarioErrorCode::InvalidStage, &at("pointer_states")))?;
        let pointer = SpectralObservable::pointer_for_states(instrument.clone(), basis.vectors())
            .map_err(lib_error(ScenarioErrorCode::InvalidStage, &at("pointer_states")))?;
        let ready_spec = doc.ready.clone().unwrap_or_else(|| StateDoc::Preset("basis:0".into()));
        let ready = state_vector(&ready_spec, &instrument, &at("ready"))?;
        let ideal = Premeasurement::ideal(measured, pointer, &basis, ready)
            .map_err(lib_error(ScenarioErrorCode::InvalidStage, &at("kind")))?;

        let pm = match &doc.kind {
            KindDoc::Ideal => ideal,
            KindDoc::Exact(exact) => {
                let dressings = match (&exact.dressings, exact.random_dressings) {
                    (Some(list), None) => {
                        if list.len() != k {
                            return Err(ScenarioError::new(
                                ScenarioErrorCode::DimensionMismatch,
                                at("kind.exact.dressings"),
                                format!("{} dressings for {k} measured outcomes", list.len()),
                            ));
                        }
                        list.iter()
                            .enumerate()
                            .map(|(j, d)| {
                                let loc = format!("stages[{i}].kind.exact.dressings[{j}]");
                                let mut out = Dressing::identity(d_obj, d_ins);
                                if let Some(m) = &d.object {
                                    out.object = matrix(m, d_obj, &format!("{loc}.object"))?;
                                }
                                if let Some(m) = &d.instrument {
                                    out.instrument = matrix(m, d_ins, &format!("{loc}.instrument"))?;
                                }
                                Ok(out)
                            })
                            .collect::<Parsed<Vec<_>>>()?
                    }
                    (None, Some(seed)) => ideal.random_dressings(&mut random::rng(seed)),
                    _ => {
                        return Err(invalid(
                            "kind.exact",
                            "give exactly one of `dressings` and `random_dressings`".into(),
                        ))
                    }
                };
                Premeasurement::exact(&ideal, &dressings)
                    .map_err(lib_error(ScenarioErrorCode::InvalidStage, &at("kind.exact")))?
            }
        };
        touched.extend(doc.object.iter().map(String::as_str));
        touched.insert(doc.instrument.as_str());
        stages.push(pm);
    }
    Ok(stages)
}

fn product_state(
    factors: &[FactorDoc],
    location: &str,
    layout: &SubsystemLayout,
    stages: &[Premeasurement],
) -> Parsed<StateVector> {
    let instruments: Vec<String> = stages.iter().map(Premeasurement::instrument_label).collect();
    let mut covered: HashSet<String> = HashSet::new();
    let mut state: Option<StateVector> = None;
    for (f, factor) in factors.iter().enumerate() {
        let at = format!("{location}[{f}]");
        let sub = resolve_labels(&factor.subsystems, layout, &format!("{at}.subsystems"))?;
        for l in &factor.subsystems {
            if instruments.contains(l) {
                return Err(ScenarioError::new(
                    ScenarioErrorCode::MalformedState,
                    format!("{at}.subsystems"),
                    format!("`{l}` is an instrument and starts in its ready state"),
                ));
            }
            if !covered.insert(l.clone()) {
                return Err(ScenarioError::new(
                    ScenarioErrorCode::MalformedState,
                    format!("{at}.subsystems"),
                    format!("`{l}` appears in more than one factor"),
                ));
            }
        }
        let v = state_vector(&factor.state, &sub, &format!("{at}.state"))?;
        state = Some(match state {
            None => v,
            Some(s) => s.tensor(&v).map_err(lib_error(ScenarioErrorCode::MalformedState, &at))?,
        });
    }
    for label in layout.labels() {
        if !instruments.iter().any(|i| i == label) && !covered.contains(label) {
            return Err(ScenarioError::new(
                ScenarioErrorCode::MalformedState,
                location,
                format!("no initial state given for `{label}`"),
            ));
        }
    }
    for pm in stages {
        let ready = pm.ready_state();
        state = Some(match state {
            None => ready.clone(),
            Some(s) => s.tensor(ready).map_err(lib_error(ScenarioErrorCode::MalformedState, location))?,
        });
    }
    state
        .expect("at least one stage")
        .permute(&layout.labels())
        .map_err(lib_error(ScenarioErrorCode::MalformedState, location))
}

fn build_initial(
    doc: &InitialDoc,
    layout: &SubsystemLayout,
    stages: &[Premeasurement],
) -> Parsed<Vec<(f64, StateVector)>> {
    match doc {
        InitialDoc::Factors(factors) => Ok(vec![(1.0, product_state(factors, "initial.factors", layout, stages)?)]),
        InitialDoc::Ensemble(members) => {
            if members.is_empty() {
                return Err(ScenarioError::new(ScenarioErrorCode::MalformedState, "initial.ensemble", "empty ensemble"));
            }
            let out = members
                .iter()
                .enumerate()
                .map(|(m, member)| {
                    let at = format!("initial.ensemble[{m}]");
                    if member.weight.is_nan() || member.weight <= 0.0 {
                        return Err(ScenarioError::new(
                            ScenarioErrorCode::MalformedState,
                            format!("{at}.weight"),
                            "weights must be positive",
                        ));
                    }
                    Ok((member.weight, product_state(&member.factors, &format!("{at}.factors"), layout, stages)?))
                })
                .collect::<Parsed<Vec<_>>>()?;
            let total: f64 = out.iter().map(|(w, _)| w).sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(ScenarioError::new(
                    ScenarioErrorCode::MalformedState,
                    "initial.ensemble",
                    format!("weights sum to {total}, expected 1"),
                ));
            }
            Ok(out)
        }
    }
}

fn build_analysis(
    doc: &AnalysisDoc,
    at: &str,
    layout: &SubsystemLayout,
    stages: &[Premeasurement],
    pure: bool,
) -> Parsed<Analysis> {
    let invalid = |msg: String| ScenarioError::new(ScenarioErrorCode::InvalidAnalysis, at, msg);
    let stage = |t: usize| {
        if t < stages.len() {
            Ok(t)
        } else {
            Err(invalid(format!("no stage {t}")))
        }
    };
    let need_pure = |what: &str| {
        if pure {
            Ok(())
        } else {
            Err(invalid(format!("`{what}` needs a pure initial state")))
        }
    };
    Ok(match doc {
        AnalysisDoc::Branches { stage: t } => {
            need_pure("branches")?;
            Analysis::Branches {
                stage: stage(t.unwrap_or(stages.len() - 1))?,
            }
        }
        AnalysisDoc::ImproperMixture {
            pointer_of_stage,
            coherence_of_stage,
        } => {
            let t = stage(*pointer_of_stage)?;
            let coherence = coherence_of_stage.map(stage).transpose()?;
            if let Some(c) = coherence {
                if stages[c].instrument_label() == stages[t].instrument_label() {
                    return Err(invalid("coherence is measured on the traced-out pointer".into()));
                }
            }
            Analysis::ImproperMixture { stage: t, coherence }
        }
        AnalysisDoc::WorldBranches { pointer_of_stage } => {
            need_pure("world_branches")?;
            Analysis::WorldBranches {
                stage: stage(*pointer_of_stage)?,
            }
        }
        AnalysisDoc::EnsembleUpdate { event, monte_carlo } => {
            let event = match event {
                EventDoc::PointerPosition { stage: t, branch } => {
                    let pointer = stages[stage(*t)?].pointer();
                    if *branch >= pointer.len() {
                        return Err(invalid(format!("stage {t} has no pointer position {branch}")));
                    }
                    pointer.projector(*branch).clone()
                }
                EventDoc::Projection(factor) => {
                    let sub = resolve_labels(&factor.subsystems, layout, &format!("{at}.event.subsystems"))?;
                    let v = state_vector(&factor.state, &sub, &format!("{at}.event.state"))?;
                    Projector::rank_one(sub, v.amplitudes()).map_err(lib_error(ScenarioErrorCode::InvalidAnalysis, at))?
                }
            };
            if event.support().len() == layout.len() {
                return Err(invalid("the event must leave some subsystem untouched".into()));
            }
            if *monte_carlo == Some(0) {
                return Err(invalid("monte_carlo needs at least one sample".into()));
            }
            Analysis::EnsembleUpdate {
                event,
                monte_carlo: *monte_carlo,
            }
        }
        AnalysisDoc::ConditionReports { trials } => Analysis::ConditionReports {
            trials: trials.unwrap_or(DEFAULT_CHECK_TRIALS),
        },
    })
}
