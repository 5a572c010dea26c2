//! `train`: run PPO for each model seed, writing checkpoints, metrics, and
//! the effective configuration into the output directory.
//!
//! `metrics.csv` holds only deterministic columns so reruns with the same
//! config and seed are byte-identical; wall-clock timings go to
//! `timing.csv`.

use crate::config::TaskConfig;
use anyhow::{Context, Result};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use supervisor_core::ppo::{save_checkpoint, PpoConfig, Trainer};
use supervisor_core::seeds::{self, stream};
use supervisor_core::CoreError;

pub struct TrainOutcome {
    pub checkpoints: Vec<PathBuf>,
    pub metrics_path: PathBuf,
}

pub fn run(config: &TaskConfig, out_dir: &Path, quiet: bool) -> Result<TrainOutcome> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    fs::write(out_dir.join("effective_config.toml"), config.effective_toml())?;

    let digest = config.digest()?;
    let metrics_path = out_dir.join("metrics.csv");
    let mut metrics = fs::File::create(&metrics_path)?;
    writeln!(
        metrics,
        "model,iteration,meta_steps,episodes,mean_episode_return,mean_actor_loss,mean_critic_loss"
    )?;
    let mut timing = fs::File::create(out_dir.join("timing.csv"))?;
    writeln!(timing, "model,iteration,wall_clock_seconds")?;

    let mut checkpoints = Vec::with_capacity(config.models);
    for model in 0..config.models {
        let model_seed = seeds::derive(seeds::derive(config.seed, stream::MODEL), model as u64);
        let ppo = PpoConfig {
            seed: model_seed,
            ..config.ppo
        };
        let env = config.build_env()?;
        let mut trainer = Trainer::new(env, config.observation, ppo)?;
        if !quiet {
            eprintln!(
                "model {model}: training for {} meta-steps (seed {model_seed})",
                config.ppo.total_steps
            );
        }

        let run_result: Result<(), CoreError> = (|| {
            while !trainer.finished() {
                let stats = trainer.run_iteration()?;
                writeln!(
                    metrics,
                    "{},{},{},{},{},{},{}",
                    model,
                    stats.iteration,
                    stats.cumulative_steps,
                    stats.episodes,
                    stats.mean_episode_return,
                    stats.mean_actor_loss,
                    stats.mean_critic_loss
                )?;
                writeln!(
                    timing,
                    "{},{},{}",
                    model,
                    stats.iteration,
                    stats.elapsed.as_secs_f64()
                )?;
                if !quiet {
                    eprintln!(
                        "model {model} iter {:>4}  steps {:>9}  return {:>10.3}  actor {:>9.5}  critic {:>9.4}",
                        stats.iteration,
                        stats.cumulative_steps,
                        stats.mean_episode_return,
                        stats.mean_actor_loss,
                        stats.mean_critic_loss
                    );
                }
            }
            Ok(())
        })();

        if let Err(err) = run_result {
            // Preserve whatever the networks look like for post-mortems.
            let crash = out_dir.join(format!("crash_model_{model}.ckpt"));
            save_checkpoint(&crash, digest, &[trainer.actor(), trainer.critic()])?;
            fs::write(
                out_dir.join(format!("crash_model_{model}.txt")),
                format!("training aborted: {err}\n"),
            )?;
            return Err(err).with_context(|| {
                format!("model {model} aborted; crash state saved to {}", crash.display())
            });
        }

        let path = out_dir.join(format!("model_{model}.ckpt"));
        save_checkpoint(&path, digest, &[trainer.actor(), trainer.critic()])?;
        checkpoints.push(path);
    }

    Ok(TrainOutcome {
        checkpoints,
        metrics_path,
    })
}
