use super::*;

fn small_scalar() -> Scenario {
    let o = |s: &str| s.to_string();
    bundled(
        "scalar_relax",
        &[o("grid.T=20"), o("grid.N=1280"), o("analysis.classify_solution=false"), o("analysis.decay_slopes=false")],
    )
    .unwrap()
}

#[test]
fn bundled_scenarios_parse_and_name_criteria() {
    for b in &BUNDLED {
        let sc = Scenario::from_json(b.json, &[]).unwrap_or_else(|e| panic!("{}: {e}", b.name));
        assert_eq!(sc.name, b.name);
        assert!(!sc.criteria.is_empty(), "{}", b.name);
        let n: std::collections::HashSet<_> = sc.criteria.iter().map(|c| c.parse::<u32>().unwrap()).collect();
        assert!(n.iter().all(|c| (1..=12).contains(c)));
    }
}

#[test]
fn overrides() {
    let mut doc = serde_json::json!({"a": {"b": [1, {"c": 2}]}, "s": "x"});
    apply_override(&mut doc, "a.b.1.c=3.5").unwrap();
    apply_override(&mut doc, "a.new.deep=true").unwrap();
    apply_override(&mut doc, "s=plain words").unwrap();
    apply_override(&mut doc, "a.b.0=[1,2]").unwrap();
    assert_eq!(doc, serde_json::json!({"a": {"b": [[1, 2], {"c": 3.5}], "new": {"deep": true}}, "s": "plain words"}));
    assert!(apply_override(&mut doc, "no-equals").unwrap_err().is_config());
    assert!(apply_override(&mut doc, "a.b.7=1").unwrap_err().is_config());
    assert!(apply_override(&mut doc, "s.x=1").unwrap_err().is_config());
}

fn config_path(e: Error) -> String {
    match e {
        Error::Config { path, .. } => path,
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn validation_names_the_field() {
    let json = BUNDLED[0].json;
    let mut doc: Value = serde_json::from_str(json).unwrap();
    doc.as_object_mut().unwrap().remove("gamma");
    assert_eq!(config_path(Scenario::from_value(doc, &[]).unwrap_err()), "gamma");

    let bad = |o: &str| config_path(Scenario::from_json(json, &[o.to_string()]).unwrap_err());
    assert_eq!(bad("gamma=1.0"), "gamma");
    assert_eq!(bad("gamma=\"half\""), "gamma");
    assert_eq!(bad("grid.N=99"), "grid.N");
    assert_eq!(bad("grid.T=-1"), "grid.T");
    assert_eq!(bad("schema=\"fracrelax.scenario/0\""), "schema");
    assert_eq!(bad("operator.kind=\"sparse\""), "operator.kind");
    assert_eq!(bad("operator.A=[[1,2]]"), "operator.A");
    assert_eq!(bad("x0=[1,2]"), "x0");
    assert_eq!(bad("analysis.bogus=1"), "analysis");
    assert_eq!(bad("solver=\"weyl-liouville\""), "forcing");
    assert_eq!(bad("forcing.coupling={\"kind\":\"sin\",\"l\":0.1}"), "solver");
}

#[test]
fn stages_are_marked() {
    let art = run(&small_scalar()).unwrap();
    let r = &art.report;
    assert!(matches!(r.ap_report, Stage::Skipped { .. }));
    assert!(matches!(r.condition_p, Stage::Skipped { .. }));
    assert!(matches!(r.residual_max, Stage::Done { .. }));
    // expectations that depend on skipped stages fail rather than pass silently
    let names: Vec<_> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["remainder_tail", "decay_slopes", "verdict"]);
    assert!(r.checks.iter().find(|c| c.name == "residual_max").unwrap().passed);
}

#[test]
fn failed_analysis_is_recorded() {
    let mut sc = small_scalar();
    sc.analysis.contraction_cert = true;
    sc.analysis.beta = Some(2.0);
    let art = run(&sc).unwrap();
    assert!(matches!(art.report.contraction, Stage::Failed { .. }));
    assert!(matches!(art.report.residual_max, Stage::Done { .. }));
}

#[test]
fn outputs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let sc = small_scalar();
    let mut a = run(&sc).unwrap();
    let files = emit_outputs(&mut a, &dir.path().join("a")).unwrap();
    let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
    assert_eq!(names, ["trajectory.csv", "norm_curves.csv", "ap_report.json", "run_report.json"]);
    let traj = std::fs::read_to_string(&files[0]).unwrap();
    assert!(traj.starts_with("t,u_1,residual\n"));
    assert_eq!(traj.lines().count(), 1282);
    let curves = std::fs::read_to_string(&files[1]).unwrap();
    assert!(curves.starts_with("t,norm_S,norm_P,norm_R\n"));
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(&files[3]).unwrap()).unwrap();
    assert_eq!(report.outputs.len(), 4);
    assert_eq!(report.schema, REPORT_SCHEMA);

    let mut b = run(&sc).unwrap();
    let again = emit_outputs(&mut b, &dir.path().join("b")).unwrap();
    for i in 0..2 {
        assert_eq!(std::fs::read(&files[i]).unwrap(), std::fs::read(&again[i]).unwrap());
    }
}

#[test]
fn unwritable_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let mut a = run(&small_scalar()).unwrap();
    match emit_outputs(&mut a, &blocker.join("out")) {
        Err(Error::Io { path, .. }) => assert!(path.starts_with(&blocker)),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}
