//! Policy evaluation: seeded rollouts on the compiled environment with
//! stochastic or greedy action selection.

use crate::config::{EnvName, TaskConfig};
use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use supervisor_core::mdp::AgentAction;
use supervisor_core::ppo::{greedy_action, sample_action, softmax, DenseNetwork};
use supervisor_core::seeds::{self, stream};
use supervisor_core::supervisor::CompiledEnv;

/// One evaluated rollout.
#[derive(Debug, Clone, Copy)]
pub struct Rollout {
    pub model: usize,
    pub index: usize,
    /// Summed reward over all agents and steps.
    pub total_reward: f64,
    /// Summed reward divided by the agent count.
    pub per_agent_reward: f64,
    pub meta_steps: usize,
    pub completed: bool,
}

/// Aggregate over all rollouts of all models. Rewards use the per-agent
/// convention (summed reward / n); totals are reported alongside.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub best_reward: f64,
    pub avg_reward: f64,
    pub best_len_meta: usize,
    pub best_len_joint: usize,
    pub avg_len_meta: f64,
    pub best_reward_sum: f64,
    pub avg_reward_sum: f64,
    pub rollouts: Vec<Rollout>,
    pub agents: usize,
}

impl EvalReport {
    /// The environment's comparison optimum for the headline reward.
    pub fn optimum_note(&self, env: EnvName) -> String {
        match env {
            EnvName::Switch => "optimal per-agent reward: 5 (every agent reaches its tile)".into(),
            EnvName::Traffic => format!(
                "collision-free reference: -0.01 * tau per car per step (best rollout ran {} joint steps)",
                self.best_len_joint
            ),
            EnvName::Combat => "optimal reward: 0 (red team defeated)".into(),
        }
    }
}

/// Runs `config.eval_rollouts` seeded rollouts for each actor. Stochastic
/// selection samples the policy like training does; `greedy` takes the
/// argmax action instead. Rollouts stop at the episode end or at
/// `config.eval_step_cap` meta-steps.
pub fn evaluate(config: &TaskConfig, actors: &[DenseNetwork], greedy: bool) -> Result<EvalReport> {
    let mut rollouts = Vec::with_capacity(actors.len() * config.eval_rollouts);
    let eval_base = seeds::derive(config.seed, stream::EVAL);
    for (model, actor) in actors.iter().enumerate() {
        let mut compiled = CompiledEnv::new(config.build_env()?, 0);
        for index in 0..config.eval_rollouts {
            let rollout_seed =
                seeds::derive(eval_base, (model * 1_000_000 + index) as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(
                rollout_seed,
                stream::ACTION_SAMPLER,
            ));
            compiled.reset(rollout_seed);

            let mut total_reward = 0.0;
            let mut meta_steps = 0;
            let mut completed = false;
            while meta_steps < config.eval_step_cap {
                let obs = compiled.observe_meta(config.observation);
                let dist = softmax(&actor.forward(&obs)?);
                let action = if greedy {
                    greedy_action(&dist)
                } else {
                    sample_action(&dist, &mut rng).0
                };
                let step = compiled.step(AgentAction(action))?;
                total_reward += step.meta_reward;
                meta_steps += 1;
                if step.terminal {
                    completed = true;
                    break;
                }
            }
            rollouts.push(Rollout {
                model,
                index,
                total_reward,
                per_agent_reward: total_reward / config.agents as f64,
                meta_steps,
                completed,
            });
        }
    }

    let best = rollouts
        .iter()
        .copied()
        .max_by(|a, b| {
            a.per_agent_reward
                .partial_cmp(&b.per_agent_reward)
                .unwrap()
                .then(b.meta_steps.cmp(&a.meta_steps))
        })
        .expect("at least one rollout");
    let count = rollouts.len() as f64;
    Ok(EvalReport {
        best_reward: best.per_agent_reward,
        avg_reward: rollouts.iter().map(|r| r.per_agent_reward).sum::<f64>() / count,
        best_len_meta: best.meta_steps,
        best_len_joint: best.meta_steps / config.agents,
        avg_len_meta: rollouts.iter().map(|r| r.meta_steps as f64).sum::<f64>() / count,
        best_reward_sum: best.total_reward,
        avg_reward_sum: rollouts.iter().map(|r| r.total_reward).sum::<f64>() / count,
        rollouts,
        agents: config.agents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn switch2() -> TaskConfig {
        TaskConfig::from_toml(
            "[task]\nenv = \"switch\"\nagents = 2\neval_rollouts = 4\neval_step_cap = 60\n",
            &[],
        )
        .unwrap()
    }

    #[test]
    fn evaluation_is_reproducible() {
        let config = switch2();
        let (inputs, actions) = config.network_shape().unwrap();
        let actor = DenseNetwork::standard(inputs, actions, 7).unwrap();
        let a = evaluate(&config, &[actor.clone()], false).unwrap();
        let b = evaluate(&config, &[actor], false).unwrap();
        assert_eq!(a.avg_reward, b.avg_reward);
        assert_eq!(a.best_len_meta, b.best_len_meta);
        assert_eq!(a.avg_len_meta, b.avg_len_meta);
    }

    #[test]
    fn capped_rollouts_report_the_cap() {
        let config = switch2();
        let (inputs, actions) = config.network_shape().unwrap();
        // Noop-only policy never finishes: logits fixed to prefer action 4.
        let mut actor = DenseNetwork::new(&[inputs, actions], 0).unwrap();
        for i in 0..actor.param_count() {
            actor.set_param(i, 0.0);
        }
        // Bias toward noop dominates the softmax.
        let bias_index = inputs * actions + 4;
        actor.set_param(bias_index, 50.0);
        let report = evaluate(&config, &[actor], true).unwrap();
        assert_eq!(report.best_len_meta, 60);
        assert!((report.avg_len_meta - 60.0).abs() < 1e-12);
        assert!(report.rollouts.iter().all(|r| !r.completed));
    }

    #[test]
    fn completed_episode_lengths_divide_by_agent_count() {
        let config = switch2();
        let (inputs, actions) = config.network_shape().unwrap();
        let actor = DenseNetwork::standard(inputs, actions, 3).unwrap();
        let report = evaluate(&config, &[actor], false).unwrap();
        for r in &report.rollouts {
            if r.completed {
                assert_eq!(r.meta_steps % 2, 0);
            }
        }
        assert_eq!(report.best_len_joint, report.best_len_meta / 2);
    }
}
