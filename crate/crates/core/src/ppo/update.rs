//! The clipped-surrogate policy update and the critic regression.

use super::adam::Adam;
use super::net::{log_softmax, DenseNetwork, Gradients};
use super::rollout::TrajectoryBatch;
use super::PpoConfig;
use crate::error::{CoreError, Result};

/// Mean losses over one iteration's updates.
#[derive(Debug, Clone, Copy)]
pub struct LossReport {
    /// Clipped surrogate plus entropy term, averaged over the updates.
    pub mean_actor_loss: f64,
    /// Mean squared error of the critic against rewards-to-go.
    pub mean_critic_loss: f64,
    pub mean_entropy: f64,
}

/// Actor loss over the batch and its gradient with respect to every actor
/// parameter.
///
/// Per sample: `ratio = pi(a|s) / pi_behavior(a|s)`,
/// `surrogate = min(ratio * A, clamp(ratio, 1-eps, 1+eps) * A)`, and the loss
/// is `-mean(surrogate) - entropy_coef * mean(entropy)`. The gradient flows
/// through the ratio only where the unclipped term attains the minimum.
pub(super) fn actor_objective(
    actor: &DenseNetwork,
    batch: &TrajectoryBatch,
    config: &PpoConfig,
) -> Result<(f64, f64, Gradients)> {
    let len = batch.len();
    let actions = actor.output_len();
    let acts = actor.forward_batch(&batch.observations, len)?;
    let logits = acts.output();

    let mut d_logits = vec![0.0; len * actions];
    let mut loss_sum = 0.0;
    let mut entropy_sum = 0.0;
    let scale = 1.0 / len as f64;
    let eps = config.clip_epsilon;
    let beta = config.entropy_coef;

    for t in 0..len {
        let row = &logits[t * actions..(t + 1) * actions];
        let lp = log_softmax(row);
        let probs: Vec<f64> = lp.iter().map(|&v| v.exp()).collect();
        let action = batch.actions[t];
        let advantage = batch.advantages[t];

        let ratio = (lp[action] - batch.behavior_log_probs[t]).exp();
        let unclipped = ratio * advantage;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * advantage;
        let surrogate = unclipped.min(clipped);
        // p * log p -> 0 as p -> 0; probs of 0 still have finite lp here.
        let entropy: f64 = -probs.iter().zip(&lp).map(|(&p, &l)| p * l).sum::<f64>();

        loss_sum += -surrogate - beta * entropy;
        entropy_sum += entropy;

        let flow = unclipped <= clipped;
        let d_row = &mut d_logits[t * actions..(t + 1) * actions];
        for j in 0..actions {
            let indicator = if j == action { 1.0 } else { 0.0 };
            let mut d = beta * probs[j] * (lp[j] + entropy);
            if flow {
                d -= advantage * ratio * (indicator - probs[j]);
            }
            d_row[j] = d * scale;
        }
    }

    let grads = actor.backward_batch(&acts, &d_logits);
    Ok((loss_sum * scale, entropy_sum * scale, grads))
}

/// Critic mean-squared-error against rewards-to-go, with gradients.
pub(super) fn critic_objective(
    critic: &DenseNetwork,
    batch: &TrajectoryBatch,
) -> Result<(f64, Gradients)> {
    let len = batch.len();
    let acts = critic.forward_batch(&batch.observations, len)?;
    let scale = 1.0 / len as f64;
    let mut d_values = vec![0.0; len];
    let mut loss = 0.0;
    for (t, (&v, &g)) in acts.output().iter().zip(&batch.rewards_to_go).enumerate() {
        let err = v - g;
        loss += err * err * scale;
        d_values[t] = 2.0 * err * scale;
    }
    let grads = critic.backward_batch(&acts, &d_values);
    Ok((loss, grads))
}

/// Runs `config.updates_per_iteration` full-batch gradient steps on both
/// networks. Behavior log-probabilities, rewards-to-go, and advantages stay
/// frozen at their collection-time values throughout.
pub fn ppo_update(
    actor: &mut DenseNetwork,
    critic: &mut DenseNetwork,
    actor_opt: &mut Adam,
    critic_opt: &mut Adam,
    batch: &TrajectoryBatch,
    config: &PpoConfig,
) -> Result<LossReport> {
    if batch.is_empty() || batch.rewards_to_go.len() != batch.len() {
        return Err(CoreError::ContractViolation(
            "ppo_update needs a non-empty batch with computed targets".into(),
        ));
    }

    let mut actor_losses = 0.0;
    let mut critic_losses = 0.0;
    let mut entropies = 0.0;
    for update in 0..config.updates_per_iteration {
        let (actor_loss, entropy, actor_grads) = actor_objective(actor, batch, config)?;
        let (critic_loss, critic_grads) = critic_objective(critic, batch)?;
        if !actor_loss.is_finite() || !critic_loss.is_finite() {
            return Err(CoreError::NonFinite(format!(
                "update {update}: actor loss {actor_loss}, critic loss {critic_loss}"
            )));
        }
        actor_opt.apply(actor, &actor_grads, config.learning_rate);
        critic_opt.apply(critic, &critic_grads, config.learning_rate);
        actor_losses += actor_loss;
        critic_losses += critic_loss;
        entropies += entropy;
    }

    let updates = config.updates_per_iteration as f64;
    Ok(LossReport {
        mean_actor_loss: actor_losses / updates,
        mean_critic_loss: critic_losses / updates,
        mean_entropy: entropies / updates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppo::net::softmax;

    fn toy_batch(len: usize, obs_dim: usize, actions: usize, seed: u64) -> TrajectoryBatch {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut batch = TrajectoryBatch {
            obs_dim,
            ..TrajectoryBatch::default()
        };
        for t in 0..len {
            for _ in 0..obs_dim {
                batch.observations.push(rng.gen_range(-1.0..1.0));
            }
            batch.actions.push(rng.gen_range(0..actions));
            // Generic behavior log-probs keep ratios away from the clip
            // kinks so finite differences stay valid.
            batch.behavior_log_probs.push(rng.gen_range(-2.2..-0.3));
            batch.rewards.push(rng.gen_range(-1.0..1.0));
            batch.episode_starts.push(t % 5 == 0);
            batch.rewards_to_go.push(rng.gen_range(-1.0..1.0));
            batch.advantages.push(rng.gen_range(-1.5..1.5));
        }
        batch
    }

    /// Central finite differences over every actor parameter must match the
    /// analytic loss gradient: this pins the softmax/ratio/clip/entropy
    /// calculus, not just the layer backprop.
    #[test]
    fn actor_gradient_matches_finite_differences() {
        let config = PpoConfig::default();
        let actor = DenseNetwork::new(&[3, 8, 4], 5).unwrap();
        let batch = toy_batch(6, 3, 4, 17);

        let (_, _, grads) = actor_objective(&actor, &batch, &config).unwrap();
        let h = 1e-6;
        let mut probe = actor.clone();
        for index in 0..actor.param_count() {
            let original = actor.param(index);
            probe.set_param(index, original + h);
            let plus = actor_objective(&probe, &batch, &config).unwrap().0;
            probe.set_param(index, original - h);
            let minus = actor_objective(&probe, &batch, &config).unwrap().0;
            probe.set_param(index, original);
            let numeric = (plus - minus) / (2.0 * h);
            let analytic = grads.param(index);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            assert!(
                rel < 1e-5,
                "param {index}: analytic {analytic}, numeric {numeric}"
            );
        }
    }

    #[test]
    fn critic_gradient_matches_finite_differences() {
        let critic = DenseNetwork::new(&[3, 8, 1], 9).unwrap();
        let batch = toy_batch(6, 3, 2, 23);
        let (_, grads) = critic_objective(&critic, &batch).unwrap();
        let h = 1e-6;
        let mut probe = critic.clone();
        for index in 0..critic.param_count() {
            let original = critic.param(index);
            probe.set_param(index, original + h);
            let plus = critic_objective(&probe, &batch).unwrap().0;
            probe.set_param(index, original - h);
            let minus = critic_objective(&probe, &batch).unwrap().0;
            probe.set_param(index, original);
            let numeric = (plus - minus) / (2.0 * h);
            let analytic = grads.param(index);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            assert!(rel < 1e-5, "param {index}");
        }
    }

    #[test]
    fn clip_caps_the_surrogate_contribution() {
        // ratio 1.5 with positive advantage and eps 0.2 contributes
        // 1.2 * A, not 1.5 * A.
        let config = PpoConfig::default();
        let mut actor = DenseNetwork::new(&[1, 2], 0).unwrap();
        // Zero parameters: uniform policy, log pi(a) = ln(1/2).
        for i in 0..actor.param_count() {
            actor.set_param(i, 0.0);
        }
        let advantage = 0.8;
        let behavior = (0.5f64 / 1.5).ln(); // makes ratio exactly 1.5
        let batch = TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.0],
            actions: vec![0],
            behavior_log_probs: vec![behavior],
            rewards: vec![0.0],
            episode_starts: vec![true],
            rewards_to_go: vec![0.0],
            advantages: vec![advantage],
            ..TrajectoryBatch::default()
        };
        let (loss, entropy, _) = actor_objective(&actor, &batch, &config).unwrap();
        let expected = -(1.2 * advantage) - config.entropy_coef * entropy;
        assert!((loss - expected).abs() < 1e-12, "loss {loss} vs {expected}");
    }

    #[test]
    fn fresh_batch_has_unit_ratios() {
        // Rolled out and updated with the same parameters: the clipped and
        // unclipped terms coincide, surrogate = advantage.
        let config = PpoConfig::default();
        let actor = DenseNetwork::new(&[2, 4, 3], 3).unwrap();
        let obs = vec![0.4, -0.9];
        let dist = softmax(&actor.forward(&obs).unwrap());
        let action = 1;
        let batch = TrajectoryBatch {
            obs_dim: 2,
            observations: obs,
            actions: vec![action],
            behavior_log_probs: vec![dist[action].ln()],
            rewards: vec![0.0],
            episode_starts: vec![true],
            rewards_to_go: vec![0.5],
            advantages: vec![0.7],
            ..TrajectoryBatch::default()
        };
        let (loss, entropy, _) = actor_objective(&actor, &batch, &config).unwrap();
        assert!((loss - (-0.7 - config.entropy_coef * entropy)).abs() < 1e-9);
    }

    #[test]
    fn zero_advantage_leaves_only_entropy() {
        let config = PpoConfig {
            entropy_coef: 0.0,
            ..PpoConfig::default()
        };
        let actor = DenseNetwork::new(&[2, 4, 3], 3).unwrap();
        let mut batch = toy_batch(8, 2, 3, 31);
        batch.advantages.iter_mut().for_each(|a| *a = 0.0);
        let (loss, _, grads) = actor_objective(&actor, &batch, &config).unwrap();
        assert_eq!(loss, 0.0);
        for (dw, db) in &grads.layers {
            assert!(dw.iter().all(|&g| g == 0.0));
            assert!(db.iter().all(|&g| g == 0.0));
        }
    }

    #[test]
    fn no_op_update_when_nothing_drives_gradients() {
        // Zero advantages, zero entropy coefficient, and a critic that is
        // already exact: one full update changes no parameter.
        let config = PpoConfig {
            entropy_coef: 0.0,
            updates_per_iteration: 1,
            ..PpoConfig::default()
        };

        let mut actor = DenseNetwork::new(&[1, 3], 2).unwrap();
        // Critic with zero weights and bias predicts 0 exactly.
        let mut critic = DenseNetwork::new(&[1, 1], 2).unwrap();
        critic.set_param(0, 0.0);
        critic.set_param(1, 0.0);

        let batch = TrajectoryBatch {
            obs_dim: 1,
            observations: vec![0.3, -0.4],
            actions: vec![0, 2],
            behavior_log_probs: vec![-1.0, -1.2],
            rewards: vec![0.0, 0.0],
            episode_starts: vec![true, true],
            rewards_to_go: vec![0.0, 0.0],
            advantages: vec![0.0, 0.0],
            ..TrajectoryBatch::default()
        };

        let actor_before = actor.clone();
        let critic_before = critic.clone();
        let mut actor_opt = Adam::new(&actor);
        let mut critic_opt = Adam::new(&critic);
        ppo_update(&mut actor, &mut critic, &mut actor_opt, &mut critic_opt, &batch, &config)
            .unwrap();
        assert_eq!(actor, actor_before);
        assert_eq!(critic, critic_before);
    }

    #[test]
    fn update_without_targets_is_rejected() {
        let config = PpoConfig::default();
        let mut actor = DenseNetwork::new(&[2, 3], 0).unwrap();
        let mut critic = DenseNetwork::new(&[2, 1], 0).unwrap();
        let mut batch = toy_batch(4, 2, 3, 7);
        batch.rewards_to_go.clear();
        let mut a_opt = Adam::new(&actor);
        let mut c_opt = Adam::new(&critic);
        assert!(matches!(
            ppo_update(&mut actor, &mut critic, &mut a_opt, &mut c_opt, &batch, &config),
            Err(CoreError::ContractViolation(_))
        ));
    }
}
