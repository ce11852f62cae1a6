use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use secvne::harness::{cmd_compare, cmd_evaluate, cmd_generate, cmd_train, Algorithm, RunConfig};
use secvne::Result;

#[derive(Parser)]
#[command(
    name = "secvne",
    version,
    about = "Security-aware virtual network embedding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a substrate and request stream and write them to a scenario directory.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the policy on the training half of a scenario.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scenario directory written by `generate`.
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay the test half of a scenario and write per-window metrics.
    Evaluate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        algorithm: Algorithm,
        /// Model file, required for css-rl.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several algorithms on shared per-seed scenarios.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Repeat to list algorithms; defaults to all four.
        #[arg(long)]
        algorithm: Vec<Algorithm>,
        /// Repeat to list seeds; defaults to the config's seed list.
        #[arg(long)]
        seed: Vec<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed {
                cfg = cfg.with_seed(seed);
            }
            let scenario = cmd_generate(&cfg, &out)?;
            println!(
                "wrote {} substrate nodes and {} requests to {}",
                scenario.substrate.node_count(),
                scenario.stream.arrival_count(),
                out.display()
            );
        }
        Command::Train {
            config,
            scenario,
            epochs,
            out,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(epochs) = epochs {
                cfg.training.epochs = epochs;
            }
            let model = cmd_train(&cfg, &scenario, &out)?;
            println!(
                "trained {} epochs ({} updates), model written to {}",
                model.epochs,
                model.batch_updates,
                out.display()
            );
        }
        Command::Evaluate {
            scenario,
            algorithm,
            model,
            out,
        } => {
            let path = cmd_evaluate(&scenario, algorithm, model.as_deref(), &out)?;
            println!("wrote {}", path.display());
        }
        Command::Compare {
            config,
            algorithm,
            seed,
            epochs,
            out,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(epochs) = epochs {
                cfg.training.epochs = epochs;
            }
            let algorithms = if algorithm.is_empty() {
                Algorithm::ALL.to_vec()
            } else {
                algorithm
            };
            let seeds = if seed.is_empty() { cfg.seeds.clone() } else { seed };
            let comparison = cmd_compare(&cfg, &algorithms, &seeds, &out)?;
            for (algorithm, seed, error) in &comparison.failures {
                eprintln!("error: {algorithm} seed {seed}: {error}");
            }
            print!("{}", comparison.summary_csv());
            if !comparison.failures.is_empty() {
                return Err(secvne::VneError::State(format!(
                    "{} of {} runs failed",
                    comparison.failures.len(),
                    comparison.failures.len() + comparison.runs.len()
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
