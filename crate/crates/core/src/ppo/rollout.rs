//! Rollout collection on a compiled environment and target computation
//! (rewards-to-go, advantages).

use super::net::{sample_action, softmax, DenseNetwork};
use super::PpoConfig;
use crate::error::Result;
use crate::mdp::{AgentAction, MultiAgentEnv, ObservationMode};
use crate::seeds::{self, stream};
use crate::supervisor::CompiledEnv;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Experience gathered from one batch of episodes, one row per meta-step.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryBatch {
    pub obs_dim: usize,
    /// Flattened `len x obs_dim` meta-observations actually fed to the actor.
    pub observations: Vec<f64>,
    pub actions: Vec<usize>,
    /// Log-probabilities under the behavior policy at collection time.
    pub behavior_log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    /// True on the first step of each episode.
    pub episode_starts: Vec<bool>,
    /// Discounted within-episode suffix sums; filled by [`compute_targets`].
    pub rewards_to_go: Vec<f64>,
    /// `G_t - V(s_t)`, optionally normalized; filled by [`compute_targets`].
    pub advantages: Vec<f64>,
    /// Undiscounted return of each episode in the batch.
    pub episode_returns: Vec<f64>,
    pub episode_lengths: Vec<usize>,
}

impl TrajectoryBatch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Seeding state threaded through successive collections so that a whole
/// training run is a pure function of its run seed.
#[derive(Debug, Clone)]
pub struct RolloutContext {
    pub sampler: ChaCha8Rng,
    run_seed: u64,
    episodes_started: u64,
}

impl RolloutContext {
    pub fn new(run_seed: u64) -> Self {
        RolloutContext {
            sampler: ChaCha8Rng::seed_from_u64(seeds::derive(run_seed, stream::ACTION_SAMPLER)),
            run_seed,
            episodes_started: 0,
        }
    }

    fn next_episode_seed(&mut self) -> u64 {
        let seed = seeds::derive(
            seeds::derive(self.run_seed, stream::ENV_EPISODE),
            self.episodes_started,
        );
        self.episodes_started += 1;
        seed
    }
}

/// Runs whole episodes until at least `config.steps_per_batch` meta-steps are
/// gathered. Episodes truncate at `config.steps_per_episode` meta-steps; each
/// stored observation is the exact meta-observation the actor sampled from.
pub fn collect_rollouts<E: MultiAgentEnv>(
    compiled: &mut CompiledEnv<E>,
    actor: &DenseNetwork,
    mode: ObservationMode,
    config: &PpoConfig,
    ctx: &mut RolloutContext,
) -> Result<TrajectoryBatch> {
    let obs_dim = compiled.meta_observation_len(mode);
    let mut batch = TrajectoryBatch {
        obs_dim,
        ..TrajectoryBatch::default()
    };

    while batch.len() < config.steps_per_batch {
        let seed = ctx.next_episode_seed();
        compiled.reset(seed);
        let mut episode_len = 0usize;
        let mut episode_return = 0.0;
        loop {
            let obs = compiled.observe_meta(mode);
            let dist = softmax(&actor.forward(&obs)?);
            let (action, log_prob) = sample_action(&dist, &mut ctx.sampler);
            let step = compiled.step(AgentAction(action))?;

            batch.observations.extend_from_slice(&obs);
            batch.actions.push(action);
            batch.behavior_log_probs.push(log_prob);
            batch.rewards.push(step.meta_reward);
            batch.episode_starts.push(episode_len == 0);

            episode_return += step.meta_reward;
            episode_len += 1;
            if step.terminal || episode_len >= config.steps_per_episode {
                break;
            }
        }
        batch.episode_returns.push(episode_return);
        batch.episode_lengths.push(episode_len);
    }
    Ok(batch)
}

/// Fills rewards-to-go (`G_t = sum_{k>=t} gamma^{k-t} r_k` within each
/// episode) and advantages (`A_t = G_t - V(s_t)` under the current critic).
/// Advantages are normalized to zero mean and unit variance per batch unless
/// the variance is below `1e-8` or `normalize` is off.
pub fn compute_targets(
    batch: &mut TrajectoryBatch,
    gamma: f64,
    critic: &DenseNetwork,
    normalize: bool,
) -> Result<()> {
    let len = batch.len();
    batch.rewards_to_go = vec![0.0; len];
    let mut future = 0.0;
    for t in (0..len).rev() {
        let episode_ends_here = t + 1 == len || batch.episode_starts[t + 1];
        if episode_ends_here {
            future = 0.0;
        }
        future = batch.rewards[t] + gamma * future;
        batch.rewards_to_go[t] = future;
    }

    let values = critic.forward_batch(&batch.observations, len)?;
    batch.advantages = batch
        .rewards_to_go
        .iter()
        .zip(values.output())
        .map(|(g, v)| g - v)
        .collect();

    if normalize && len > 0 {
        let mean = batch.advantages.iter().sum::<f64>() / len as f64;
        let variance = batch
            .advantages
            .iter()
            .map(|a| (a - mean).powi(2))
            .sum::<f64>()
            / len as f64;
        if variance >= 1e-8 {
            let std = variance.sqrt();
            for a in &mut batch.advantages {
                *a = (*a - mean) / std;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{random_mmdp, ExplicitEnv};

    fn bandit_compiled() -> CompiledEnv<ExplicitEnv> {
        let env = ExplicitEnv::new(random_mmdp(0, 1, 1, 2, 4)).unwrap();
        CompiledEnv::new(env, 0)
    }

    #[test]
    fn collects_at_least_the_requested_steps() {
        let mut compiled = bandit_compiled();
        let actor = DenseNetwork::standard(2, 2, 1).unwrap();
        let config = PpoConfig {
            steps_per_batch: 100,
            steps_per_episode: 10,
            ..PpoConfig::default()
        };
        let mut ctx = RolloutContext::new(3);
        let batch =
            collect_rollouts(&mut compiled, &actor, ObservationMode::Individual, &config, &mut ctx)
                .unwrap();
        assert!(batch.len() >= 100);
        assert!(batch.episode_returns.len() >= 10); // horizon 4 < truncation 10
        assert_eq!(batch.observations.len(), batch.len() * batch.obs_dim);
        assert_eq!(batch.episode_lengths.iter().sum::<usize>(), batch.len());
    }

    #[test]
    fn rewards_to_go_follow_the_discount_recursion() {
        let critic = DenseNetwork::new(&[1, 1], 0).unwrap();
        let mut batch = TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.0; 3],
            actions: vec![0; 3],
            behavior_log_probs: vec![0.0; 3],
            rewards: vec![0.0, 0.0, 1.0],
            episode_starts: vec![true, false, false],
            ..TrajectoryBatch::default()
        };
        batch.episode_returns.push(1.0);
        batch.episode_lengths.push(3);
        compute_targets(&mut batch, 0.5, &critic, false).unwrap();
        assert_eq!(batch.rewards_to_go, vec![0.25, 0.5, 1.0]);
    }

    #[test]
    fn rewards_to_go_respect_episode_boundaries() {
        let critic = DenseNetwork::new(&[1, 1], 0).unwrap();
        let mut batch = TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.0; 4],
            actions: vec![0; 4],
            behavior_log_probs: vec![0.0; 4],
            rewards: vec![1.0, 2.0, 3.0, 4.0],
            episode_starts: vec![true, false, true, false],
            ..TrajectoryBatch::default()
        };
        compute_targets(&mut batch, 1.0, &critic, false).unwrap();
        assert_eq!(batch.rewards_to_go, vec![3.0, 2.0, 7.0, 4.0]);
    }

    #[test]
    fn zero_rewards_give_zero_returns() {
        let critic = DenseNetwork::new(&[1, 1], 0).unwrap();
        let mut batch = TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.0; 5],
            actions: vec![0; 5],
            behavior_log_probs: vec![0.0; 5],
            rewards: vec![0.0; 5],
            episode_starts: vec![true, false, false, false, false],
            ..TrajectoryBatch::default()
        };
        compute_targets(&mut batch, 0.99, &critic, false).unwrap();
        assert!(batch.rewards_to_go.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn constant_advantages_skip_normalization() {
        // A critic with all-zero weights predicts a constant; constant
        // rewards-to-go then give zero-variance advantages which must be
        // left alone by the guard.
        let mut critic = DenseNetwork::new(&[1, 1], 0).unwrap();
        critic.set_param(0, 0.0);
        critic.set_param(1, 0.0);
        let mut batch = TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.0; 3],
            actions: vec![0; 3],
            behavior_log_probs: vec![0.0; 3],
            rewards: vec![2.0, 2.0, 2.0],
            episode_starts: vec![true, true, true],
            ..TrajectoryBatch::default()
        };
        compute_targets(&mut batch, 0.99, &critic, true).unwrap();
        assert_eq!(batch.advantages, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn normalization_centers_and_scales() {
        let critic = DenseNetwork::new(&[1, 1], 0).unwrap();
        let mut batch = TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.0; 4],
            actions: vec![0; 4],
            behavior_log_probs: vec![0.0; 4],
            rewards: vec![1.0, -1.0, 3.0, 0.5],
            episode_starts: vec![true, true, true, true],
            ..TrajectoryBatch::default()
        };
        compute_targets(&mut batch, 0.99, &critic, true).unwrap();
        let mean = batch.advantages.iter().sum::<f64>() / 4.0;
        let var = batch.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collection_is_reproducible() {
        let actor = DenseNetwork::standard(2, 2, 1).unwrap();
        let config = PpoConfig {
            steps_per_batch: 64,
            ..PpoConfig::default()
        };
        let collect = || {
            let mut compiled = bandit_compiled();
            let mut ctx = RolloutContext::new(11);
            collect_rollouts(&mut compiled, &actor, ObservationMode::Individual, &config, &mut ctx)
                .unwrap()
        };
        let a = collect();
        let b = collect();
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.rewards, b.rewards);
        assert_eq!(a.observations, b.observations);
    }
}
