//! `inspect`: render one rollout frame by frame with per-meta-step
//! annotations (assignment, agent, reward).

use crate::config::TaskConfig;
use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use supervisor_core::mdp::{AgentAction, MultiAgentEnv};
use supervisor_core::ppo::{load_checkpoint, sample_action, softmax, DenseNetwork};
use supervisor_core::seeds::{self, stream};
use supervisor_core::supervisor::CompiledEnv;

pub fn run(
    config: &TaskConfig,
    model: Option<&Path>,
    steps: Option<usize>,
    out: &mut impl std::io::Write,
) -> Result<()> {
    let actor: Option<DenseNetwork> = match model {
        Some(path) => {
            let (_, nets) = load_checkpoint(path, Some(config.digest()?))
                .with_context(|| format!("loading {}", path.display()))?;
            Some(
                nets.into_iter()
                    .next()
                    .with_context(|| format!("{} holds no networks", path.display()))?,
            )
        }
        None => None,
    };

    let n = config.agents;
    let step_limit = steps.unwrap_or(20 * n);
    let seed = seeds::derive(config.seed, stream::EVAL);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, stream::ACTION_SAMPLER));
    let mut compiled = CompiledEnv::new(config.build_env()?, seed);
    let actions = compiled.meta_action_count();

    writeln!(
        out,
        "{} with {} agents, {} meta-actions, {} policy",
        config.env.as_str(),
        n,
        actions,
        if actor.is_some() { "checkpoint" } else { "random" }
    )?;
    writeln!(out, "{}\n", compiled.inner().render())?;

    let mut total_reward = 0.0;
    let mut env_steps = 0usize;
    for meta_step in 0..step_limit {
        let obs = compiled.observe_meta(config.observation);
        let action = match &actor {
            Some(net) => sample_action(&softmax(&net.forward(&obs)?), &mut rng).0,
            None => sample_action(&vec![1.0 / actions as f64; actions], &mut rng).0,
        };
        let agent = compiled.current().assignments.first_unassigned()?;
        let name = compiled.inner().action_name(action);
        let result = compiled.step(AgentAction(action))?;
        total_reward += result.meta_reward;
        writeln!(
            out,
            "meta-step {meta_step}: assign a{action} ({name}) -> agent {agent}, reward {}",
            result.meta_reward
        )?;
        if result.env_stepped {
            env_steps += 1;
            writeln!(out, "\n{}\n", compiled.inner().render())?;
        }
        if result.terminal {
            writeln!(
                out,
                "episode finished after {} meta-steps ({} environment steps), total reward {}",
                meta_step + 1,
                env_steps,
                total_reward
            )?;
            return Ok(());
        }
    }
    writeln!(
        out,
        "stopped after {step_limit} meta-steps ({env_steps} environment steps), total reward {total_reward}"
    )?;
    Ok(())
}
