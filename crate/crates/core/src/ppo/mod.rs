//! From-scratch actor-critic PPO trained directly on the compiled MDP.
//!
//! Two dense networks (the standard six-layer stack over `M = |s| + n`
//! inputs) share nothing: the actor outputs one logit per meta-action, the
//! critic one value. Collection runs whole episodes; updates are full-batch
//! with frozen behavior log-probabilities, one-shot advantages
//! (`A_t = G_t - V(s_t)`), a clipped probability-ratio surrogate, entropy
//! regularization, and Adam. Everything is `f64` and bit-reproducible from
//! the run seed.

mod adam;
mod checkpoint;
mod net;
mod rollout;
mod trainer;
mod update;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{config_digest, load_checkpoint, save_checkpoint};
pub use net::{
    forward_policy, gradient_check, greedy_action, log_softmax, sample_action, softmax,
    BatchActivations, DenseLayer, DenseNetwork, Gradients, STANDARD_HIDDEN,
};
pub use rollout::{collect_rollouts, compute_targets, RolloutContext, TrajectoryBatch};
pub use trainer::{IterationStats, Trainer};
pub use update::{ppo_update, LossReport};

use crate::error::{CoreError, Result};

/// Hyperparameters of the trainer. Defaults follow the reference protocol:
/// clip 0.2, discount 0.99, entropy coefficient 0.01, learning rate 2e-4,
/// 1,000-step episodes, 10,000-step batches, 10 updates per iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoConfig {
    pub clip_epsilon: f64,
    pub gamma: f64,
    pub entropy_coef: f64,
    pub learning_rate: f64,
    /// Episode truncation, in meta-steps.
    pub steps_per_episode: usize,
    /// Minimum meta-steps per collected batch.
    pub steps_per_batch: usize,
    pub updates_per_iteration: usize,
    /// Total meta-steps of one training run.
    pub total_steps: usize,
    pub seed: u64,
    /// Normalize advantages to zero mean, unit variance per batch.
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            clip_epsilon: 0.2,
            gamma: 0.99,
            entropy_coef: 0.01,
            learning_rate: 0.0002,
            steps_per_episode: 1_000,
            steps_per_batch: 10_000,
            updates_per_iteration: 10,
            total_steps: 5_000_000,
            seed: 0,
            normalize_advantages: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("clip_epsilon", self.clip_epsilon),
            ("gamma", self.gamma),
            ("learning_rate", self.learning_rate),
        ];
        for (name, value) in positive {
            if value <= 0.0 || !value.is_finite() {
                return Err(CoreError::InvalidInput(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.entropy_coef < 0.0 || !self.entropy_coef.is_finite() {
            return Err(CoreError::InvalidInput(
                "entropy_coef must be non-negative".into(),
            ));
        }
        if self.clip_epsilon >= 1.0 {
            return Err(CoreError::InvalidInput(format!(
                "clip_epsilon must be below 1, got {}",
                self.clip_epsilon
            )));
        }
        if self.gamma > 1.0 {
            return Err(CoreError::InvalidInput(format!(
                "gamma must be at most 1, got {}",
                self.gamma
            )));
        }
        let counts = [
            ("steps_per_episode", self.steps_per_episode),
            ("steps_per_batch", self.steps_per_batch),
            ("updates_per_iteration", self.updates_per_iteration),
            ("total_steps", self.total_steps),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(CoreError::InvalidInput(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert!(PpoConfig::default().validate().is_ok());
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            PpoConfig {
                clip_epsilon: 1.0,
                ..PpoConfig::default()
            },
            PpoConfig {
                gamma: 0.0,
                ..PpoConfig::default()
            },
            PpoConfig {
                steps_per_batch: 0,
                ..PpoConfig::default()
            },
            PpoConfig {
                learning_rate: -0.1,
                ..PpoConfig::default()
            },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?}");
        }
    }
}
