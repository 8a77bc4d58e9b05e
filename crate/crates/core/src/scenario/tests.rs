use super::*;

fn builtin_doc(name: &str) -> ScenarioDoc {
    serde_json::from_str(builtin(name).unwrap()).unwrap()
}

fn run_doc(doc: ScenarioDoc) -> RunReport {
    run(&Scenario::from_doc(doc).unwrap(), &RunOptions::default()).unwrap()
}

fn section<'a>(report: &'a RunReport, name: &str) -> &'a Section {
    report.sections.iter().find(|s| s.name() == name).unwrap()
}

fn error_code(text: &str) -> ScenarioErrorCode {
    parse_scenario(text).unwrap_err().code
}

const MINIMAL: &str = r#"{
  "name": "minimal",
  "subsystems": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
  "initial": {"factors": [{"subsystems": ["A"], "state": "plus"}]},
  "stages": [{"object": ["A"], "instrument": "B", "measured": {"diagonal": [0, 1]}}],
  "analyses": [{"type": "branches"}]
}"#;

#[test]
fn builtins_parse_and_pass() {
    for (name, text) in BUILTINS {
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.name(), *name);
        let report = run(&s, &RunOptions::default()).unwrap();
        assert!(report.passed(), "{name}");
        assert!(report.residuals.max_weight_deviation <= 1e-9);
    }
}

#[test]
fn stern_gerlach_shape() {
    let s = parse_scenario(builtin("stern-gerlach").unwrap()).unwrap();
    assert_eq!(s.stages().len(), 2);
    assert_eq!(s.layout().dims(), vec![2, 2, 2]);
}

#[test]
fn stern_gerlach_born_weights() {
    let report = run_doc(builtin_doc("stern-gerlach"));
    let table = section(&report, "branches").table().unwrap();
    assert_eq!(table.rows.len(), 2);
    assert!((table.rows[0].weight - 0.3).abs() <= 1e-10);
    assert!((table.rows[1].weight - 0.7).abs() <= 1e-10);
}

#[test]
fn stern_gerlach_spin_up_single_branch() {
    let mut doc = builtin_doc("stern-gerlach");
    doc.initial = InitialDoc::Factors(vec![FactorDoc {
        subsystems: vec!["S".into()],
        state: StateDoc::Preset("basis:0".into()),
    }]);
    let report = run_doc(doc);
    let table = section(&report, "branches").table().unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].k, 0);
    assert!((table.rows[0].weight - 1.0).abs() <= 1e-12);
    assert!(table.dropped.abs() <= 1e-12);
}

#[test]
fn wigner_friend_decoherence_split() {
    let report = run_doc(builtin_doc("wigner-friend"));
    match section(&report, "improper_mixture") {
        Section::ImproperMixture {
            global_purity,
            max_off_diagonal_block,
            reduced,
            ..
        } => {
            assert_eq!(reduced, "A+B");
            assert!((global_purity - 1.0).abs() <= 1e-10);
            assert!(max_off_diagonal_block.unwrap() <= 1e-10);
        }
        _ => unreachable!(),
    }
}

#[test]
fn world_split_components_differ() {
    let report = run_doc(builtin_doc("world-split"));
    match section(&report, "world_branches") {
        Section::WorldBranches {
            relative_to,
            table,
            min_trace_distance,
            ..
        } => {
            assert_eq!(relative_to, "A+B2");
            assert_eq!(table.rows.len(), 2);
            assert!(min_trace_distance.unwrap() > 0.1);
            assert!((table.rows[0].weight - 0.36).abs() <= 1e-12);
        }
        _ => unreachable!(),
    }
}

#[test]
fn ensemble_update_weights() {
    let report = run_doc(builtin_doc("ensemble-update"));
    match section(&report, "ensemble_update") {
        Section::EnsembleUpdate {
            table,
            occurrence_probability,
            monte_carlo,
            ..
        } => {
            // w'_k ∝ w_k |⟨0|ψ_k⟩|²
            let (a, b) = (0.3 * 0.5, 0.7 * 0.36);
            assert!((occurrence_probability - (a + b)).abs() <= 1e-12);
            assert!((table.rows[0].weight - a / (a + b)).abs() <= 1e-12);
            assert!((table.rows[1].weight - b / (a + b)).abs() <= 1e-12);
            let mc = monte_carlo.as_ref().unwrap();
            assert_eq!(mc.samples, 100_000);
            assert!(mc.max_standard_errors < 5.0);
        }
        _ => unreachable!(),
    }
}

#[test]
fn reports_are_deterministic() {
    for (_, text) in BUILTINS {
        let s = parse_scenario(text).unwrap();
        let opts = RunOptions {
            seed: 11,
            dump_states: true,
            ..RunOptions::default()
        };
        let a = run(&s, &opts).unwrap();
        let b = run(&s, &opts).unwrap();
        for f in [Format::Text, Format::Tsv, Format::Json] {
            assert_eq!(a.render(f), b.render(f));
        }
    }
}

#[test]
fn different_seeds_change_only_sampled_values() {
    let s = parse_scenario(builtin("ensemble-update").unwrap()).unwrap();
    let a = run(&s, &RunOptions { seed: 1, ..RunOptions::default() }).unwrap();
    let b = run(&s, &RunOptions { seed: 2, ..RunOptions::default() }).unwrap();
    assert_eq!(section(&a, "improper_mixture"), section(&b, "improper_mixture"));
    assert_ne!(section(&a, "ensemble_update"), section(&b, "ensemble_update"));
}

#[test]
fn emit_round_trips() {
    for (_, text) in BUILTINS {
        let s = parse_scenario(text).unwrap();
        assert_eq!(parse_scenario(&emit_scenario(&s)).unwrap(), s);
    }
    let s = parse_scenario(MINIMAL).unwrap();
    assert_eq!(parse_scenario(&emit_scenario(&s)).unwrap(), s);
}

#[test]
fn json_report_is_valid_json() {
    let report = run_doc(builtin_doc("wigner-friend"));
    let v: serde_json::Value = serde_json::from_str(&report.render(Format::Json)).unwrap();
    assert_eq!(v["scenario"], "wigner-friend");
    assert_eq!(v["sections"][0]["analysis"], "branches");
}

#[test]
fn text_report_has_dropped_row() {
    let report = run_doc(builtin_doc("world-split"));
    let text = report.render(Format::Text);
    assert!(text.contains("dropped"));
    assert!(text.contains("total"));
    let tsv = report.render(Format::Tsv);
    assert!(tsv.lines().any(|l| l.contains("\tweight\tdropped\t")));
}

#[test]
fn error_codes_are_distinct() {
    assert_eq!(
        error_code(&MINIMAL.replace(r#""instrument": "B""#, r#""instrument": "D""#)),
        ScenarioErrorCode::UnknownLabel
    );
    assert_eq!(
        error_code(&MINIMAL.replace(r#""object": ["A"]"#, r#""object": ["D"]"#)),
        ScenarioErrorCode::UnknownLabel
    );
    assert_eq!(
        error_code(&MINIMAL.replace("[0, 1]", "[0, 1, 2]")),
        ScenarioErrorCode::DimensionMismatch
    );
    assert_eq!(
        error_code(&MINIMAL.replace(r#""plus""#, r#""basis:7""#)),
        ScenarioErrorCode::DimensionMismatch
    );
    assert_eq!(
        error_code(&MINIMAL.replace(r#""plus""#, r#""sideways""#)),
        ScenarioErrorCode::MalformedState
    );
    assert_eq!(
        error_code(&MINIMAL.replace(r#""plus""#, "[[1, 0], [1, 0]]")),
        ScenarioErrorCode::MalformedState
    );
    assert_eq!(
        error_code(&MINIMAL.replace(r#""plus""#, r#""basis:x""#)),
        ScenarioErrorCode::MalformedState
    );
    let empty = r#"{"name": "e", "subsystems": [{"label": "A", "dim": 2}],
        "initial": {"factors": [{"subsystems": ["A"], "state": "plus"}]}, "stages": []}"#;
    assert_eq!(error_code(empty), ScenarioErrorCode::EmptyStages);
    assert_eq!(error_code("{\n  \"name\": 3\n}"), ScenarioErrorCode::Syntax);
    let codes: std::collections::HashSet<_> = [
        ScenarioErrorCode::Syntax,
        ScenarioErrorCode::UnknownLabel,
        ScenarioErrorCode::DimensionMismatch,
        ScenarioErrorCode::MalformedState,
        ScenarioErrorCode::EmptyStages,
    ]
    .iter()
    .map(|c| c.code())
    .collect();
    assert_eq!(codes.len(), 5);
}

#[test]
fn syntax_errors_carry_line() {
    let e = parse_scenario("{\n  \"name\": \"x\",\n  oops\n}").unwrap_err();
    assert!(e.location.starts_with("line 3"), "{}", e.location);
    let e = parse_scenario(&MINIMAL.replace(r#""instrument": "B""#, r#""instrument": "D""#)).unwrap_err();
    assert_eq!(e.location, "stages[0].instrument");
    assert!(e.to_string().contains("E002"));
}

#[test]
fn structural_errors() {
    // stage refers forward
    let fwd = MINIMAL.replace(r#"{"diagonal": [0, 1]}"#, r#"{"pointer_of_stage": 0}"#);
    assert_eq!(error_code(&fwd), ScenarioErrorCode::InvalidStage);
    // instrument given an initial state
    let inst = MINIMAL.replace(r#"["A"], "state""#, r#"["A", "B"], "state""#);
    assert_eq!(error_code(&inst), ScenarioErrorCode::MalformedState);
    // missing initial factor
    let three = MINIMAL.replace(
        r#"{"label": "B", "dim": 2}]"#,
        r#"{"label": "B", "dim": 2}, {"label": "C", "dim": 3}]"#,
    );
    assert_eq!(error_code(&three), ScenarioErrorCode::MalformedState);
    // instrument too small
    let small = MINIMAL
        .replace(r#"{"label": "A", "dim": 2}"#, r#"{"label": "A", "dim": 3}"#)
        .replace("[0, 1]", "[0, 1, 2]");
    assert_eq!(error_code(&small), ScenarioErrorCode::DimensionMismatch);
    // duplicate label
    let dup = MINIMAL.replace(r#"{"label": "B", "dim": 2}"#, r#"{"label": "A", "dim": 2}"#);
    assert_eq!(error_code(&dup), ScenarioErrorCode::InvalidLayout);
}

#[test]
fn mixed_start_rejects_pure_only_analyses() {
    let mut doc = builtin_doc("ensemble-update");
    doc.analyses.push(AnalysisDoc::Branches { stage: None });
    let e = Scenario::from_doc(doc).unwrap_err();
    assert_eq!(e.code, ScenarioErrorCode::InvalidAnalysis);
    assert_eq!(e.location, "analyses[3]");
}

#[test]
fn presets() {
    let bell = MINIMAL
        .replace(r#"{"label": "B", "dim": 2}]"#, r#"{"label": "B", "dim": 2}, {"label": "C", "dim": 2}]"#)
        .replace(r#"["A"], "state": "plus""#, r#"["A", "C"], "state": "bell""#);
    let s = parse_scenario(&bell).unwrap();
    let psi = &s.initial()[0].1;
    // |Φ+⟩_AC ⊗ |0⟩_B in A,B,C order: indices 0 (000) and 5 (101)
    let h = 0.5f64.sqrt();
    assert!((psi.amplitudes()[0].re - h).abs() < 1e-15);
    assert!((psi.amplitudes()[5].re - h).abs() < 1e-15);
    assert!((psi.norm() - 1.0).abs() < 1e-15);
    let minus = parse_scenario(&MINIMAL.replace(r#""plus""#, r#""minus""#)).unwrap();
    assert!((minus.initial()[0].1.amplitudes()[2].re + h).abs() < 1e-15);
}

#[test]
fn exact_stage_with_explicit_dressings() {
    // dressing 0 flips the object after registering outcome 0
    let text = MINIMAL.replace(
        r#""measured": {"diagonal": [0, 1]}}"#,
        r#""measured": {"diagonal": [0, 1]}, "kind": {"exact": {"dressings": [
            {"object": [[0, 1], [1, 0]]}, {}]}}}"#,
    )
    .replace(r#"{"type": "branches"}"#, r#"{"type": "branches"}, {"type": "condition_reports", "trials": 5}"#);
    let s = parse_scenario(&text).unwrap();
    let report = run(&s, &RunOptions::default()).unwrap();
    assert!(report.passed());
    assert_eq!(report.stages[0].kind, "exact");
    let table = section(&report, "branches").table().unwrap();
    assert!(table.rows[0].summary.starts_with("|1,0>"));
    let bad = text.replace("[[0, 1], [1, 0]]", "[[0, 1], [1, 0], [0, 0]]");
    assert_eq!(error_code(&bad), ScenarioErrorCode::DimensionMismatch);
}

#[test]
fn negative_tolerance_fails_condition_reports() {
    let s = parse_scenario(builtin("stern-gerlach").unwrap()).unwrap();
    let strict = RunOptions {
        tolerance: -1.0,
        ..RunOptions::default()
    };
    assert!(!run(&s, &strict).unwrap().passed());
}
