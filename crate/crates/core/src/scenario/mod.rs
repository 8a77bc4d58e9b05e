//! Declarative chain scenarios: a JSON document names the subsystems, the
//! initial state, the premeasurement stages and the analyses to report.
//!
//! ```json
//! {
//!   "name": "two-qubits",
//!   "subsystems": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
//!   "initial": {"factors": [{"subsystems": ["A"], "state": "plus"}]},
//!   "stages": [{"object": ["A"], "instrument": "B", "measured": {"diagonal": [0, 1]}}],
//!   "analyses": [{"type": "branches"}]
//! }
//! ```
//!
//! States are presets (`plus`, `minus`, `basis:k`, `bell`) or amplitude
//! lists whose entries are `[re, im]` pairs or reals. Instruments start in
//! their stage's `ready` state (default `basis:0`) and register outcome `k`
//! in `pointer_states[k]` (default `basis:k`).

mod parse;
mod report;
mod run;
mod schema;

pub use parse::{emit_scenario, parse_scenario, Analysis, Scenario, ScenarioError, ScenarioErrorCode};
pub use report::{
    Format, LayoutRow, MemberDump, MonteCarloRow, Residuals, RunReport, Section, StageConditions, StageRow,
    StateDump, WeightRow, WeightTable, WEIGHT_SUM_TOLERANCE,
};
pub use run::{run, RunError, RunOptions};
pub use schema::*;

/// Embedded scenario documents: `(name, document)`.
pub const BUILTINS: &[(&str, &str)] = &[
    ("stern-gerlach", include_str!("../../scenarios/stern-gerlach.json")),
    ("wigner-friend", include_str!("../../scenarios/wigner-friend.json")),
    ("world-split", include_str!("../../scenarios/world-split.json")),
    ("ensemble-update", include_str!("../../scenarios/ensemble-update.json")),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, doc)| *doc)
}

#[cfg(test)]
mod tests;
