use bornlab::scenario::{self, Overrides, Scenario};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Stochastic Schrödinger dynamics laboratory.
#[derive(Parser)]
#[command(name = "bornlab", version, about, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Scenario file (TOML) to execute.
    scenario: Option<PathBuf>,

    /// Override the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the scenario's trajectory count.
    #[arg(long)]
    trajectories: Option<usize>,

    /// Override the output path prefix.
    #[arg(long)]
    out: Option<String>,

    /// Worker threads for the trajectory fan-out (default: BORNLAB_THREADS
    /// or all cores). Results are identical for every thread count.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full invariant suite and print one pass/fail line per property.
    Verify,
    /// Inspect the built-in scenario presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List the built-in scenario names.
    List,
    /// Print a preset as a scenario document.
    Show { name: String },
}

fn configure_threads(cli_threads: Option<usize>) {
    let threads = cli_threads.or_else(|| {
        std::env::var("BORNLAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        // ignore failure: the global pool can only be set once (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run_scenario_file(cli: &Cli, path: &PathBuf) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", path.display());
            return ExitCode::FAILURE;
        }
    };
    let scenario: Scenario = match scenario::parse_scenario(&text) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::FAILURE;
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        trajectories: cli.trajectories,
        output: cli.out.clone(),
    };
    match scenario::execute(&scenario, &overrides) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for file in &report.files {
                println!("wrote {}", file.display());
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error in scenario \"{}\": {err}", scenario.name);
            ExitCode::FAILURE
        }
    }
}

fn run_verify() -> ExitCode {
    let results = bornlab::verify::run_all();
    let mut ok = true;
    for result in &results {
        println!("{}", result.describe());
        ok &= result.passed();
    }
    if ok {
        println!("all {} properties hold", results.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    match &cli.command {
        Some(Command::Verify) => run_verify(),
        Some(Command::Preset { action }) => match action {
            PresetAction::List => {
                for name in scenario::preset_names() {
                    let preset = scenario::preset(name).expect("listed preset exists");
                    println!(
                        "{name} (mode {:?}, dim {}, {} trajectories)",
                        preset.mode, preset.hilbert_dim, preset.trajectories
                    );
                }
                ExitCode::SUCCESS
            }
            PresetAction::Show { name } => match scenario::preset_document(name) {
                Some(doc) => {
                    print!("{doc}");
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("error: unknown preset \"{name}\"");
                    ExitCode::FAILURE
                }
            },
        },
        None => match &cli.scenario {
            Some(path) => run_scenario_file(&cli, path),
            None => {
                eprintln!("usage: bornlab <scenario.toml> | bornlab verify | bornlab preset list");
                ExitCode::FAILURE
            }
        },
    }
}
