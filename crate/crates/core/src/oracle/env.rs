//! Adapter exposing an [`ExplicitMmdp`] through the [`MultiAgentEnv`]
//! contract, so tabular instances can drive the compiler and trainer
//! directly (bandit sanity checks, property tests).

use super::ExplicitMmdp;
use crate::error::Result;
use crate::mdp::{EnvStepResult, JointAction, MultiAgentEnv, ObservationMode};

/// A tabular MMDP as a steppable environment. Episodes last exactly
/// `horizon` environment steps; the observation is a one-hot encoding of the
/// current state.
#[derive(Debug, Clone)]
pub struct ExplicitEnv {
    mmdp: ExplicitMmdp,
    state: usize,
    steps: usize,
}

impl ExplicitEnv {
    pub fn new(mmdp: ExplicitMmdp) -> Result<Self> {
        mmdp.validate()?;
        Ok(ExplicitEnv {
            state: mmdp.initial_state,
            steps: 0,
            mmdp,
        })
    }

    pub fn mmdp(&self) -> &ExplicitMmdp {
        &self.mmdp
    }
}

impl MultiAgentEnv for ExplicitEnv {
    type State = usize;

    fn agent_count(&self) -> usize {
        self.mmdp.agent_count
    }

    fn action_count(&self) -> usize {
        self.mmdp.action_count
    }

    fn reset(&mut self, _seed: u64) -> usize {
        // The dynamics are a fixed table; the seed has nothing to vary.
        self.state = self.mmdp.initial_state;
        self.steps = 0;
        self.state
    }

    fn state(&self) -> usize {
        self.state
    }

    fn is_terminal(&self) -> bool {
        self.steps >= self.mmdp.horizon
    }

    fn execute(&mut self, joint: &JointAction) -> Result<EnvStepResult<usize>> {
        self.validate_joint(joint)?;
        let ja = self.mmdp.joint_index(&joint.indices());
        let rewards = self.mmdp.agent_rewards(self.state, ja).to_vec();
        self.state = self.mmdp.transition(self.state, ja);
        self.steps += 1;
        Ok(EnvStepResult {
            next_state: self.state,
            rewards,
            terminal: self.is_terminal(),
        })
    }

    fn observe(&self, _mode: ObservationMode) -> Vec<f64> {
        let mut obs = vec![0.0; self.mmdp.state_count];
        obs[self.state] = 1.0;
        obs
    }

    fn observation_len(&self, _mode: ObservationMode) -> usize {
        self.mmdp.state_count
    }

    fn render(&self) -> String {
        format!(
            "state {} / {} (step {} of {})",
            self.state, self.mmdp.state_count, self.steps, self.mmdp.horizon
        )
    }
}
