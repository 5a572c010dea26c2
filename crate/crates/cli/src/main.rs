//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 verification
//! failure, 3 runtime abort.

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use supervisor_cli::commands;
use supervisor_cli::config::TaskConfig;
use supervisor_core::CoreError;

/// Marker attached to errors that are the caller's fault (exit code 1).
#[derive(Debug, Clone, Copy)]
struct UsageError;

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid usage")
    }
}

fn load_task(path: &Path) -> anyhow::Result<TaskConfig> {
    TaskConfig::from_file(path).context(UsageError)
}

#[derive(Parser)]
#[command(
    name = "supervisor",
    about = "Centralized multi-agent RL via sequential joint-action construction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train model_count PPO models and write checkpoints plus metrics.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for checkpoints, metrics, and the config dump.
        #[arg(long)]
        out: PathBuf,
        /// Suppress per-iteration progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate trained checkpoints over seeded rollouts.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding model_*.ckpt files (or one checkpoint file).
        #[arg(long)]
        models: PathBuf,
        /// Select actions by argmax instead of sampling.
        #[arg(long)]
        greedy: bool,
    },
    /// Check the compilation against the tabular oracle.
    Verify {
        /// Verify one MMDP text file instead of the random suite.
        #[arg(long)]
        mmdp: Option<PathBuf>,
        /// Number of random cases.
        #[arg(long, default_value_t = commands::verify::DEFAULT_CASES)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render one rollout with per-meta-step annotations.
    Inspect {
        #[arg(long)]
        config: PathBuf,
        /// Checkpoint to drive the policy; random actions if absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Meta-step limit.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Report joint-action versus supervisor space sizes.
    Enumerate {
        #[arg(long)]
        actions: u64,
        #[arg(long)]
        agents: u32,
        /// Also report |S'| for this many environment states.
        #[arg(long)]
        states: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Train { config, out, quiet } => {
            let task = load_task(&config)?;
            let outcome = commands::train::run(&task, &out, quiet)?;
            println!(
                "trained {} model(s); metrics at {}",
                outcome.checkpoints.len(),
                outcome.metrics_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate {
            config,
            models,
            greedy,
        } => {
            let task = load_task(&config)?;
            commands::evaluate::run(&task, &models, greedy)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { mmdp, cases, seed } => {
            let outcome = commands::verify::run(mmdp.as_deref(), cases, seed, false)?;
            Ok(if outcome.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Inspect {
            config,
            model,
            steps,
        } => {
            let task = load_task(&config)?;
            let mut stdout = std::io::stdout().lock();
            commands::inspect::run(&task, model.as_deref(), steps, &mut stdout)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate {
            actions,
            agents,
            states,
        } => {
            let mut stdout = std::io::stdout().lock();
            commands::enumerate::run(actions, agents, states, &mut stdout)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Maps an error chain onto the documented exit codes: configuration
/// problems are usage errors (1); aborted runs and mid-run I/O failures are
/// runtime aborts (3). Malformed inputs handed to a command (checkpoints,
/// MMDP files, oversized enumerations) count as usage.
fn classify(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    if let Some(core) = err.downcast_ref::<CoreError>() {
        return match core {
            CoreError::NonFinite(_) | CoreError::ContractViolation(_) | CoreError::Io(_) => 3,
            _ => 1,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    1
}
