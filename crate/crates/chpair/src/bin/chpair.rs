//! Command-line driver: run experiments, verify property suites, list
//! scenarios, and replay manifests.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chpair::scenario::{
    builtin, builtin_scenarios, config_from_manifest, load_config_map, run_experiment, RunConfig,
    OUTPUT_ROOT_ENV,
};
use chpair::verify::{print_report, suite, SUITE_NAMES};

#[derive(Parser)]
#[command(
    name = "chpair",
    version,
    about = "Numerical laboratory for a dispersionless two-component Camassa-Holm system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or a built-in scenario.
    Run {
        /// Flat JSON config file (dotted keys).
        #[arg(long, conflicts_with = "scenario")]
        config: Option<PathBuf>,
        /// Built-in scenario name (see `scenarios list`).
        #[arg(long)]
        scenario: Option<String>,
        /// Config overrides of the form key=value; may repeat.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a verification suite and print one pass/fail line per check.
    Verify {
        /// Suite name.
        #[arg(value_parser = SUITE_NAMES)]
        suite: String,
    },
    /// Scenario catalogue operations.
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Re-run the experiment recorded in a manifest.
    Emit {
        /// Path to a manifest.json produced by `run`.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for the re-run (default: `<name>-rerun`
        /// under the output root).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List the built-in scenarios.
    List,
    /// Print a scenario's configuration as flat JSON.
    Show { name: String },
}

fn cmd_run(
    config_path: Option<PathBuf>,
    scenario: Option<String>,
    overrides: Vec<String>,
) -> chpair::Result<i32> {
    let mut map: BTreeMap<String, serde_json::Value> = match (&config_path, &scenario) {
        (Some(path), None) => load_config_map(path)?,
        (None, Some(name)) => builtin(name)?.to_flat(),
        (None, None) => {
            return Err(chpair::Error::Config(
                "run needs --config <path> or --scenario <name>".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    RunConfig::apply_overrides(&mut map, &overrides)?;
    let config = RunConfig::from_flat(&map)?;
    let report = run_experiment(&config)?;
    println!(
        "{}: {} steps, wrote {} files to {}",
        report.reason.label(),
        report.steps_taken,
        report.files.len(),
        report.out_dir.display()
    );
    Ok(report.exit_code())
}

fn cmd_verify(name: &str) -> chpair::Result<i32> {
    let lines = suite(name)?;
    let ok = print_report(&lines);
    let passed = lines.iter().filter(|l| l.passed).count();
    println!("suite {name}: {passed}/{} checks passed", lines.len());
    Ok(if ok { 0 } else { 1 })
}

fn cmd_scenarios(action: ScenarioAction) -> chpair::Result<i32> {
    match action {
        ScenarioAction::List => {
            println!("{:<16} description", "name");
            for (name, blurb, config) in builtin_scenarios() {
                println!(
                    "{name:<16} {blurb} (grid n={}, t_end={})",
                    config.n_points, config.t_end
                );
            }
            println!();
            println!("run one with: chpair run --scenario <name>");
            println!(
                "output root: ${OUTPUT_ROOT_ENV} (default ./out), one subdirectory per run name"
            );
        }
        ScenarioAction::Show { name } => {
            let map = builtin(&name)?.to_flat();
            let obj = serde_json::Value::Object(map.into_iter().collect());
            println!(
                "{}",
                serde_json::to_string_pretty(&obj).expect("config json")
            );
        }
    }
    Ok(0)
}

fn cmd_emit(manifest: PathBuf, out: Option<PathBuf>) -> chpair::Result<i32> {
    let mut config = config_from_manifest(&manifest)?;
    config.output_dir = match out {
        Some(dir) => Some(dir),
        None => {
            config.name = format!("{}-rerun", config.name);
            None
        }
    };
    let report = run_experiment(&config)?;
    println!(
        "{}: re-ran {} steps into {}",
        report.reason.label(),
        report.steps_taken,
        report.out_dir.display()
    );
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            scenario,
            overrides,
        } => cmd_run(config, scenario, overrides),
        Command::Verify { suite } => cmd_verify(&suite),
        Command::Scenarios { action } => cmd_scenarios(action),
        Command::Emit { manifest, out } => cmd_emit(manifest, out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
