//! Run reports and their text, TSV and JSON renderings.

use std::fmt::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::premeasurement::ConditionReport;

/// Allowed deviation from 1 of a weight table total (dropped row included).
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Tsv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "tsv" => Ok(Format::Tsv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected text, tsv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub tolerance: f64,
    pub layout: Vec<LayoutRow>,
    pub stages: Vec<StageRow>,
    pub sections: Vec<Section>,
    pub residuals: Residuals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<StateDump>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutRow {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRow {
    pub stage: usize,
    pub object: String,
    pub instrument: String,
    pub kind: String,
    pub outcomes: usize,
    pub unitarity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub max_unitarity: f64,
    pub max_norm_deviation: f64,
    pub max_weight_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightRow {
    pub k: usize,
    pub weight: f64,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightTable {
    pub rows: Vec<WeightRow>,
    pub dropped: f64,
    pub total: f64,
}

impl WeightTable {
    pub fn new(rows: Vec<WeightRow>, dropped: f64) -> Self {
        let total = rows.iter().map(|r| r.weight).sum::<f64>() + dropped;
        WeightTable { rows, dropped, total }
    }

    pub fn sums_to_one(&self) -> bool {
        (self.total - 1.0).abs() <= WEIGHT_SUM_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloRow {
    pub samples: u64,
    pub accepted: u64,
    pub weights: Vec<f64>,
    /// Largest deviation from the exact weights in binomial standard errors.
    pub max_standard_errors: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageConditions {
    pub stage: usize,
    #[serde(serialize_with = "condition_reports")]
    pub reports: Vec<ConditionReport>,
}

fn condition_reports<S: serde::Serializer>(reports: &[ConditionReport], s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Row<'a> {
        condition: &'a str,
        max_residual: f64,
        samples: usize,
        tolerance: f64,
        pass: bool,
    }
    s.collect_seq(reports.iter().map(|r| Row {
        condition: &r.condition,
        max_residual: r.max_residual,
        samples: r.samples,
        tolerance: r.tolerance,
        pass: r.pass,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDump {
    /// `None` for the initial state.
    pub after_stage: Option<usize>,
    pub members: Vec<MemberDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberDump {
    pub weight: f64,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "analysis", rename_all = "snake_case")]
pub enum Section {
    Branches {
        stage: usize,
        pointer: String,
        table: WeightTable,
    },
    ImproperMixture {
        pointer: String,
        reduced: String,
        table: WeightTable,
        global_purity: f64,
        reduced_purity: f64,
        coherence_stage: Option<usize>,
        max_off_diagonal_block: Option<f64>,
    },
    WorldBranches {
        pointer: String,
        relative_to: String,
        table: WeightTable,
        min_trace_distance: Option<f64>,
        max_trace_distance: Option<f64>,
    },
    EnsembleUpdate {
        event_on: String,
        occurrence_probability: f64,
        table: WeightTable,
        dropped_members: Vec<usize>,
        aggregate_on: String,
        aggregate_purity: f64,
        monte_carlo: Option<MonteCarloRow>,
    },
    ConditionReports {
        trials: usize,
        stages: Vec<StageConditions>,
    },
}

impl Section {
    pub fn name(&self) -> &'static str {
        match self {
            Section::Branches { .. } => "branches",
            Section::ImproperMixture { .. } => "improper_mixture",
            Section::WorldBranches { .. } => "world_branches",
            Section::EnsembleUpdate { .. } => "ensemble_update",
            Section::ConditionReports { .. } => "condition_reports",
        }
    }

    pub fn table(&self) -> Option<&WeightTable> {
        match self {
            Section::Branches { table, .. }
            | Section::ImproperMixture { table, .. }
            | Section::WorldBranches { table, .. }
            | Section::EnsembleUpdate { table, .. } => Some(table),
            Section::ConditionReports { .. } => None,
        }
    }

    /// Scalar facts as `(key, value)` pairs in display order.
    fn facts(&self) -> Vec<(&'static str, String)> {
        let opt = |x: &Option<f64>| x.map_or("-".to_string(), sci);
        match self {
            Section::Branches { stage, pointer, .. } => vec![("stage", stage.to_string()), ("pointer", pointer.clone())],
            Section::ImproperMixture {
                pointer,
                reduced,
                global_purity,
                reduced_purity,
                coherence_stage,
                max_off_diagonal_block,
                ..
            } => vec![
                ("pointer", pointer.clone()),
                ("reduced", reduced.clone()),
                ("global_purity", fixed(*global_purity)),
                ("reduced_purity", fixed(*reduced_purity)),
                ("coherence_stage", coherence_stage.map_or("-".to_string(), |s| s.to_string())),
                ("max_off_diagonal_block", opt(max_off_diagonal_block)),
            ],
            Section::WorldBranches {
                pointer,
                relative_to,
                min_trace_distance,
                max_trace_distance,
                ..
            } => vec![
                ("pointer", pointer.clone()),
                ("relative_to", relative_to.clone()),
                ("min_trace_distance", min_trace_distance.map_or("-".to_string(), fixed)),
                ("max_trace_distance", max_trace_distance.map_or("-".to_string(), fixed)),
            ],
            Section::EnsembleUpdate {
                event_on,
                occurrence_probability,
                dropped_members,
                aggregate_on,
                aggregate_purity,
                monte_carlo,
                ..
            } => {
                let mut v = vec![
                    ("event_on", event_on.clone()),
                    ("occurrence_probability", fixed(*occurrence_probability)),
                    ("dropped_members", format!("{dropped_members:?}")),
                    ("aggregate_on", aggregate_on.clone()),
                    ("aggregate_purity", fixed(*aggregate_purity)),
                ];
                if let Some(mc) = monte_carlo {
                    v.push(("mc_samples", mc.samples.to_string()));
                    v.push(("mc_accepted", mc.accepted.to_string()));
                    let w: Vec<String> = mc.weights.iter().map(|w| fixed(*w)).collect();
                    v.push(("mc_weights", w.join(",")));
                    v.push(("mc_max_standard_errors", format!("{:.3}", mc.max_standard_errors)));
                }
                v
            }
            Section::ConditionReports { trials, .. } => vec![("trials", trials.to_string())],
        }
    }
}

impl RunReport {
    pub fn weight_tables_sum_to_one(&self) -> bool {
        self.sections.iter().filter_map(Section::table).all(WeightTable::sums_to_one)
    }

    pub fn conditions_pass(&self) -> bool {
        self.sections.iter().all(|s| match s {
            Section::ConditionReports { stages, .. } => stages.iter().flat_map(|s| &s.reports).all(|r| r.pass),
            _ => true,
        })
    }

    /// Every weight table sums to one and every condition check passes.
    pub fn passed(&self) -> bool {
        self.weight_tables_sum_to_one() && self.conditions_pass()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Tsv => self.render_tsv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports always serialise");
                s.push('\n');
                s
            }
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let layout: Vec<String> = self.layout.iter().map(|l| format!("{}({})", l.label, l.dim)).collect();
        let _ = writeln!(out, "scenario  {}", self.scenario);
        let _ = writeln!(out, "seed      {}", self.seed);
        let _ = writeln!(out, "tolerance {}", sci(self.tolerance));
        let _ = writeln!(out, "layout    {}", layout.join(" "));
        out.push('\n');
        let rows: Vec<Vec<String>> = self
            .stages
            .iter()
            .map(|s| {
                vec![
                    s.stage.to_string(),
                    s.object.clone(),
                    s.instrument.clone(),
                    s.kind.clone(),
                    s.outcomes.to_string(),
                    sci(s.unitarity_residual),
                ]
            })
            .collect();
        let _ = writeln!(out, "[stages]");
        out += &aligned(&["stage", "object", "instrument", "kind", "outcomes", "unitarity"], &rows);
        for section in &self.sections {
            out.push('\n');
            let _ = writeln!(out, "[{}]", section.name());
            for (k, v) in section.facts() {
                let _ = writeln!(out, "  {k} = {v}");
            }
            if let Some(t) = section.table() {
                let mut rows: Vec<Vec<String>> = t
                    .rows
                    .iter()
                    .map(|r| vec![r.k.to_string(), fixed(r.weight), r.summary.clone()])
                    .collect();
                rows.push(vec!["dropped".into(), fixed(t.dropped), String::new()]);
                rows.push(vec!["total".into(), fixed(t.total), String::new()]);
                out += &aligned(&["k", "weight", "component"], &rows);
            }
            if let Section::ConditionReports { stages, .. } = section {
                let rows: Vec<Vec<String>> = stages
                    .iter()
                    .flat_map(|s| {
                        s.reports.iter().map(move |r| {
                            vec![
                                s.stage.to_string(),
                                r.condition.clone(),
                                sci(r.max_residual),
                                r.samples.to_string(),
                                if r.pass { "pass" } else { "FAIL" }.to_string(),
                            ]
                        })
                    })
                    .collect();
                out += &aligned(&["stage", "condition", "max_residual", "samples", "result"], &rows);
            }
        }
        out.push('\n');
        let _ = writeln!(out, "[residuals]");
        let _ = writeln!(out, "  max_unitarity = {}", sci(self.residuals.max_unitarity));
        let _ = writeln!(out, "  max_norm_deviation = {}", sci(self.residuals.max_norm_deviation));
        let _ = writeln!(out, "  max_weight_deviation = {}", sci(self.residuals.max_weight_deviation));
        if let Some(states) = &self.states {
            for dump in states {
                out.push('\n');
                match dump.after_stage {
                    None => {
                        let _ = writeln!(out, "[state initial]");
                    }
                    Some(t) => {
                        let _ = writeln!(out, "[state after stage {t}]");
                    }
                }
                for (m, member) in dump.members.iter().enumerate() {
                    let _ = writeln!(out, "  member {m} weight {}", fixed(member.weight));
                    for (i, [re, im]) in member.amplitudes.iter().enumerate() {
                        let _ = writeln!(out, "    {i:>4}  {re:+.12} {im:+.12}i");
                    }
                }
            }
        }
        out
    }

    fn render_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "meta\tscenario\t{}", self.scenario);
        let _ = writeln!(out, "meta\tseed\t{}", self.seed);
        let _ = writeln!(out, "meta\ttolerance\t{}", sci(self.tolerance));
        for l in &self.layout {
            let _ = writeln!(out, "layout\t{}\t{}", l.label, l.dim);
        }
        for s in &self.stages {
            let _ = writeln!(
                out,
                "stage\t{}\t{}\t{}\t{}\t{}\t{}",
                s.stage,
                s.object,
                s.instrument,
                s.kind,
                s.outcomes,
                sci(s.unitarity_residual)
            );
        }
        for (i, section) in self.sections.iter().enumerate() {
            let name = section.name();
            for (k, v) in section.facts() {
                let _ = writeln!(out, "{name}\t{i}\t{k}\t{v}");
            }
            if let Some(t) = section.table() {
                for r in &t.rows {
                    let _ = writeln!(out, "{name}\t{i}\tweight\t{}\t{}\t{}", r.k, fixed(r.weight), r.summary);
                }
                let _ = writeln!(out, "{name}\t{i}\tweight\tdropped\t{}\t", fixed(t.dropped));
                let _ = writeln!(out, "{name}\t{i}\tweight\ttotal\t{}\t", fixed(t.total));
            }
            if let Section::ConditionReports { stages, .. } = section {
                for s in stages {
                    for r in &s.reports {
                        let _ = writeln!(
                            out,
                            "{name}\t{i}\t{}\t{}\t{}\t{}\t{}",
                            s.stage,
                            r.condition,
                            sci(r.max_residual),
                            r.samples,
                            if r.pass { "pass" } else { "fail" }
                        );
                    }
                }
            }
        }
        let _ = writeln!(out, "residual\tmax_unitarity\t{}", sci(self.residuals.max_unitarity));
        let _ = writeln!(out, "residual\tmax_norm_deviation\t{}", sci(self.residuals.max_norm_deviation));
        let _ = writeln!(out, "residual\tmax_weight_deviation\t{}", sci(self.residuals.max_weight_deviation));
        if let Some(states) = &self.states {
            for dump in states {
                let when = dump.after_stage.map_or("initial".to_string(), |t| t.to_string());
                for (m, member) in dump.members.iter().enumerate() {
                    for (i, [re, im]) in member.amplitudes.iter().enumerate() {
                        let _ = writeln!(out, "state\t{when}\t{m}\t{i}\t{re:.15e}\t{im:.15e}");
                    }
                }
            }
        }
        out
    }
}

fn fixed(x: f64) -> String {
    format!("{x:.12}")
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn aligned(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut s = String::from(" ");
        for (cell, w) in cells.iter().zip(&widths) {
            let _ = write!(s, " {cell:<w$}");
        }
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    };
    let mut out = line(headers.to_vec());
    for row in rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}
