//! `evaluate`: load checkpoints and report best/average rewards and episode
//! lengths over seeded rollouts.

use crate::config::TaskConfig;
use crate::eval::{evaluate, EvalReport};
use anyhow::{bail, Context, Result};
use std::path::Path;
use supervisor_core::ppo::{load_checkpoint, DenseNetwork};

/// Loads every `model_*.ckpt` under `models_dir` (or a single checkpoint
/// file), validating digests and actor shapes against the config.
pub fn load_actors(config: &TaskConfig, models_dir: &Path) -> Result<Vec<DenseNetwork>> {
    let digest = config.digest()?;
    let mut paths = Vec::new();
    if models_dir.is_file() {
        paths.push(models_dir.to_path_buf());
    } else {
        for entry in std::fs::read_dir(models_dir)
            .with_context(|| format!("reading {}", models_dir.display()))?
        {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            if name.starts_with("model_") && name.ends_with(".ckpt") {
                paths.push(path);
            }
        }
        paths.sort();
    }
    if paths.is_empty() {
        bail!("no model_*.ckpt checkpoints found in {}", models_dir.display());
    }

    let (inputs, actions) = config.network_shape()?;
    let mut actors = Vec::with_capacity(paths.len());
    for path in &paths {
        let (_, nets) = load_checkpoint(path, Some(digest))
            .with_context(|| format!("loading {}", path.display()))?;
        let actor = nets
            .into_iter()
            .next()
            .with_context(|| format!("{} holds no networks", path.display()))?;
        if actor.input_len() != inputs || actor.output_len() != actions {
            bail!(
                "{}: actor is {}x{}, task needs {}x{}",
                path.display(),
                actor.input_len(),
                actor.output_len(),
                inputs,
                actions
            );
        }
        actors.push(actor);
    }
    Ok(actors)
}

pub fn run(config: &TaskConfig, models_dir: &Path, greedy: bool) -> Result<EvalReport> {
    let actors = load_actors(config, models_dir)?;
    let report = evaluate(config, &actors, greedy)?;
    print_report(config, &report, actors.len(), greedy);
    Ok(report)
}

fn print_report(config: &TaskConfig, report: &EvalReport, models: usize, greedy: bool) {
    let selection = if greedy { "greedy" } else { "stochastic" };
    println!(
        "evaluation: {} rollouts ({} models x {}), {} action selection",
        report.rollouts.len(),
        models,
        config.eval_rollouts,
        selection
    );
    println!(
        "  best reward (per agent):  {:.3}   [summed: {:.3}]",
        report.best_reward, report.best_reward_sum
    );
    println!(
        "  avg reward (per agent):   {:.3}   [summed: {:.3}]",
        report.avg_reward, report.avg_reward_sum
    );
    println!(
        "  best episode length:      {} meta-actions ({} joint actions)",
        report.best_len_meta, report.best_len_joint
    );
    println!("  avg episode length:       {:.2} meta-actions", report.avg_len_meta);
    println!("  {}", report.optimum_note(config.env));
}
