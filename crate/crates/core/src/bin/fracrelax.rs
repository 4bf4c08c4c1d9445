use clap::{Parser, Subcommand};
use fracrelax::harness::{self, RunArtifacts, Scenario, BUNDLED};
use fracrelax::Error;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(name = "fracrelax", version, about = "Fractional relaxation scenarios: solve, analyze, emit artifacts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario (a config path or a bundled scenario name).
    Run {
        config: String,
        /// Output directory; defaults to `out/<scenario name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dotted `key=value` override, applied before validation.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Exit with code 4 if any expectation in the config fails.
        #[arg(long)]
        check: bool,
    },
    /// Run every `*.json` config in a directory.
    Batch {
        dir: PathBuf,
        /// Parent directory for per-scenario outputs.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        check: bool,
    },
    /// List bundled scenarios.
    ListScenarios,
}

fn load(config: &str, overrides: &[String]) -> Result<Scenario, Error> {
    let path = Path::new(config);
    if !path.exists() && BUNDLED.iter().any(|b| b.name == config) {
        return harness::bundled(config, overrides);
    }
    Scenario::load(path, overrides)
}

fn code_for(e: &Error) -> u8 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Runs, writes artifacts and prints a summary; returns the exit code.
fn execute(sc: &Scenario, out: &Path, check: bool) -> u8 {
    let mut art: RunArtifacts = match harness::run(sc) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{}: {e}", sc.name);
            return code_for(&e);
        }
    };
    if let Err(e) = harness::emit_outputs(&mut art, out) {
        eprintln!("{}: {e}", sc.name);
        return EXIT_NUMERICAL;
    }
    let r = &art.report;
    println!("{}: wrote {} files to {}", sc.name, r.outputs.len(), out.display());
    if let Some(ap) = r.ap_report.value() {
        println!("  verdict {:?}", ap.verdict);
    }
    for c in &r.checks {
        let v = c.value.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
        println!("  {} {} = {v} (bound {:.3e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.bound);
    }
    for w in &r.warnings {
        println!("  warning: {w}");
    }
    if check && !r.checks_passed() {
        EXIT_CHECK
    } else {
        0
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Run { config, out, overrides, check } => match load(&config, &overrides) {
            Ok(sc) => {
                let out = out.unwrap_or_else(|| Path::new("out").join(&sc.name));
                execute(&sc, &out, check)
            }
            Err(e) => {
                eprintln!("{e}");
                EXIT_CONFIG
            }
        },
        Cmd::Batch { dir, out, check } => {
            let mut paths: Vec<PathBuf> = match std::fs::read_dir(&dir) {
                Ok(rd) => rd
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "json"))
                    .collect(),
                Err(e) => {
                    eprintln!("{}", Error::io(&dir, e));
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            paths.sort();
            let codes: Vec<u8> = paths
                .par_iter()
                .map(|p| match Scenario::load(p, &[]) {
                    Ok(sc) => execute(&sc, &out.join(&sc.name), check),
                    Err(e) => {
                        eprintln!("{}: {e}", p.display());
                        EXIT_CONFIG
                    }
                })
                .collect();
            codes.into_iter().max().unwrap_or(0)
        }
        Cmd::ListScenarios => {
            for b in &BUNDLED {
                match Scenario::from_json(b.json, &[]) {
                    Ok(sc) => println!("{:<20} criteria {:<8} {}", sc.name, sc.criteria.join(","), sc.description),
                    Err(e) => println!("{:<20} invalid: {e}", b.name),
                }
            }
            0
        }
    };
    ExitCode::from(code)
}
