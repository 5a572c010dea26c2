//! The iteration loop: collect, compute targets, update, report.

use super::adam::Adam;
use super::net::DenseNetwork;
use super::rollout::{collect_rollouts, compute_targets, RolloutContext};
use super::update::ppo_update;
use super::PpoConfig;
use crate::error::{CoreError, Result};
use crate::mdp::{MultiAgentEnv, ObservationMode};
use crate::seeds::{self, stream};
use crate::supervisor::CompiledEnv;
use std::time::{Duration, Instant};

/// One metrics row per PPO iteration.
#[derive(Debug, Clone)]
pub struct IterationStats {
    pub iteration: usize,
    /// Meta-steps consumed so far, including this iteration.
    pub cumulative_steps: usize,
    pub episodes: usize,
    pub mean_episode_return: f64,
    pub mean_actor_loss: f64,
    pub mean_critic_loss: f64,
    pub mean_entropy: f64,
    pub elapsed: Duration,
}

/// Trains one actor-critic pair on one compiled environment.
pub struct Trainer<E: MultiAgentEnv> {
    compiled: CompiledEnv<E>,
    mode: ObservationMode,
    config: PpoConfig,
    actor: DenseNetwork,
    critic: DenseNetwork,
    actor_opt: Adam,
    critic_opt: Adam,
    ctx: RolloutContext,
    steps_done: usize,
    iterations_done: usize,
}

impl<E: MultiAgentEnv> Trainer<E> {
    pub fn new(env: E, mode: ObservationMode, config: PpoConfig) -> Result<Self> {
        config.validate()?;
        let compiled = CompiledEnv::new(env, config.seed);
        let inputs = compiled.meta_observation_len(mode);
        let actions = compiled.meta_action_count();
        let actor =
            DenseNetwork::standard(inputs, actions, seeds::derive(config.seed, stream::NET_INIT_ACTOR))?;
        let critic =
            DenseNetwork::standard(inputs, 1, seeds::derive(config.seed, stream::NET_INIT_CRITIC))?;
        let actor_opt = Adam::new(&actor);
        let critic_opt = Adam::new(&critic);
        Ok(Trainer {
            compiled,
            mode,
            ctx: RolloutContext::new(config.seed),
            config,
            actor,
            critic,
            actor_opt,
            critic_opt,
            steps_done: 0,
            iterations_done: 0,
        })
    }

    pub fn actor(&self) -> &DenseNetwork {
        &self.actor
    }

    pub fn critic(&self) -> &DenseNetwork {
        &self.critic
    }

    pub fn config(&self) -> &PpoConfig {
        &self.config
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    pub fn finished(&self) -> bool {
        self.steps_done >= self.config.total_steps
    }

    /// One iteration: collect a batch, compute targets, run the updates.
    pub fn run_iteration(&mut self) -> Result<IterationStats> {
        let start = Instant::now();
        let gamma = self.compiled.effective_gamma(self.config.gamma);

        let mut batch = collect_rollouts(
            &mut self.compiled,
            &self.actor,
            self.mode,
            &self.config,
            &mut self.ctx,
        )?;
        compute_targets(&mut batch, gamma, &self.critic, self.config.normalize_advantages)?;
        let report = ppo_update(
            &mut self.actor,
            &mut self.critic,
            &mut self.actor_opt,
            &mut self.critic_opt,
            &batch,
            &self.config,
        )?;
        if !self.actor.all_finite() || !self.critic.all_finite() {
            return Err(CoreError::NonFinite(format!(
                "non-finite parameter after iteration {}",
                self.iterations_done + 1
            )));
        }

        self.steps_done += batch.len();
        self.iterations_done += 1;
        let episodes = batch.episode_returns.len();
        Ok(IterationStats {
            iteration: self.iterations_done,
            cumulative_steps: self.steps_done,
            episodes,
            mean_episode_return: batch.episode_returns.iter().sum::<f64>() / episodes as f64,
            mean_actor_loss: report.mean_actor_loss,
            mean_critic_loss: report.mean_critic_loss,
            mean_entropy: report.mean_entropy,
            elapsed: start.elapsed(),
        })
    }

    /// Runs iterations until `total_steps` meta-steps are consumed, invoking
    /// `on_iteration` after each one.
    pub fn run(&mut self, mut on_iteration: impl FnMut(&IterationStats)) -> Result<Vec<IterationStats>> {
        let mut all = Vec::new();
        while !self.finished() {
            let stats = self.run_iteration()?;
            on_iteration(&stats);
            all.push(stats);
        }
        Ok(all)
    }
}
