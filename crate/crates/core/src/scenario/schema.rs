//! Serde model of scenario documents.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub subsystems: Vec<SubsystemDoc>,
    pub initial: InitialDoc,
    pub stages: Vec<StageDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analyses: Vec<AnalysisDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemDoc {
    pub label: String,
    pub dim: usize,
}

/// Initial state of every subsystem that is not an instrument. Instruments
/// start in their stage's ready state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDoc {
    Factors(Vec<FactorDoc>),
    /// Proper mixture of product states.
    Ensemble(Vec<MemberDoc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDoc {
    pub subsystems: Vec<String>,
    pub state: StateDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDoc {
    pub weight: f64,
    pub factors: Vec<FactorDoc>,
}

/// A named preset (`plus`, `minus`, `basis:k`, `bell`) or an amplitude list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateDoc {
    Preset(String),
    Amplitudes(Vec<ComplexDoc>),
}

/// `[re, im]` or a bare real number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexDoc {
    Pair([f64; 2]),
    Real(f64),
}

/// Rows of complex entries.
pub type MatrixDoc = Vec<Vec<ComplexDoc>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageDoc {
    pub object: Vec<String>,
    pub instrument: String,
    pub measured: ObservableDoc,
    /// One per measured branch; defaults to `basis:k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer_states: Option<Vec<StateDoc>>,
    /// Defaults to `basis:0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ready: Option<StateDoc>,
    #[serde(default, skip_serializing_if = "KindDoc::is_ideal")]
    pub kind: KindDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableDoc {
    Diagonal(Vec<f64>),
    Matrix(MatrixDoc),
    /// The pointer observable of an earlier stage, lifted to this stage's object.
    PointerOfStage(usize),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindDoc {
    #[default]
    Ideal,
    Exact(ExactDoc),
}

impl KindDoc {
    pub fn is_ideal(&self) -> bool {
        matches!(self, KindDoc::Ideal)
    }
}

/// Either explicit per-branch dressings or a seed for random ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dressings: Option<Vec<DressingDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_dressings: Option<u64>,
}

/// Missing entries mean the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DressingDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instrument: Option<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnalysisDoc {
    /// Complete-measurement branches after a stage (default: the last one).
    Branches {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stage: Option<usize>,
    },
    /// Decomposition of the rest along a stage's pointer positions.
    ImproperMixture {
        pointer_of_stage: usize,
        /// Also report the off-diagonal pointer blocks of this stage.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coherence_of_stage: Option<usize>,
    },
    WorldBranches {
        pointer_of_stage: usize,
    },
    EnsembleUpdate {
        event: EventDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        monte_carlo: Option<u64>,
    },
    ConditionReports {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trials: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventDoc {
    PointerPosition { stage: usize, branch: usize },
    Projection(FactorDoc),
}
