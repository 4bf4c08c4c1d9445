use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracrelax")).args(args).output().unwrap()
}

fn small() -> Vec<String> {
    ["grid.T=20", "grid.N=1280", "analysis.classify_solution=false", "analysis.decay_slopes=false", "expect={}"]
        .iter()
        .flat_map(|o| ["--override".to_string(), o.to_string()])
        .collect()
}

fn run_with(extra: &[&str], name: &str) -> Output {
    // later overrides win
    let mut args = vec!["run".to_string()];
    args.extend(small());
    args.extend(extra.iter().map(|s| s.to_string()));
    args.push(name.to_string());
    cli(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn list_scenarios() {
    let out = cli(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.contains("degenerate_heat") && text.contains("criteria 8"));
}

#[test]
fn run_writes_four_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let out = run_with(&["--check", "--out", out_dir.to_str().unwrap()], "scalar_relax");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectory.csv", "norm_curves.csv", "ap_report.json", "run_report.json"] {
        assert!(out_dir.join(f).is_file(), "{f}");
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"schema": "fracrelax.scenario/1", "name": "x"}"#).unwrap();
    let out = cli(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("operator"));
    assert_eq!(cli(&["run", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(run_with(&["--override", "gamma=1.5"], "scalar_relax").status.code(), Some(2));
    assert_eq!(cli(&["batch", "/nonexistent"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let out = run_with(
        &["--out", o.to_str().unwrap(), "--override", "weyl.history=20", "--override", "weyl.tol=1e-14"],
        "weyl_line",
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!o.join("trajectory.csv").exists());
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out = run_with(&["--out", blocker.join("o").to_str().unwrap()], "scalar_relax");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(blocker.to_str().unwrap()));
}

#[test]
fn failed_expectation_exits_4_only_with_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let strict = ["--out", o.to_str().unwrap(), "--override", "expect.residual_max=1e-12"];
    assert_eq!(run_with(&strict, "scalar_relax").status.code(), Some(0));
    let mut checked = strict.to_vec();
    checked.push("--check");
    assert_eq!(run_with(&checked, "scalar_relax").status.code(), Some(4));
}

#[test]
fn batch_runs_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfgs = dir.path().join("cfg");
    std::fs::create_dir(&cfgs).unwrap();
    for name in ["scalar_relax", "regularized_relax"] {
        let sc = fracrelax::harness::bundled(name, &["grid.N=400".into(), "grid.T=4".into()]).unwrap();
        let mut doc = serde_json::to_value(&sc).unwrap();
        doc["analysis"] = serde_json::json!({});
        doc["expect"] = serde_json::json!({"residual_max": 1.0});
        std::fs::write(cfgs.join(format!("{name}.json")), doc.to_string()).unwrap();
    }
    let out_root = dir.path().join("out");
    let out = cli(&["batch", cfgs.to_str().unwrap(), "--out", out_root.to_str().unwrap(), "--check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["scalar_relax", "regularized_relax"] {
        assert!(Path::new(&out_root).join(name).join("run_report.json").is_file());
    }
}
