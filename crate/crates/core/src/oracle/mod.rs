//! Ground-truth machinery: explicit tabular MDPs, exact solvers, and checks
//! that the supervisor compilation preserves optimal values.
//!
//! Small multi-agent MDPs are enumerated twice — once into the explicit
//! joint-action MDP (`|A|^n` actions) and once into the compiled supervisor
//! MDP (`|A|` actions over meta-states) — then both are solved exactly and
//! compared against each other and against exhaustive open-loop plan
//! enumeration.

mod compile;
mod env;
mod equivalence;
mod random;
mod solve;
mod text;

pub use compile::{build_compiled_mdp, build_joint_mdp, CompiledIndex};
pub use env::ExplicitEnv;
pub use equivalence::{check_equivalence, EquivalenceReport, EQUIVALENCE_TOLERANCE};
pub use random::random_mmdp;
pub use solve::{best_open_loop_return, value_iteration, SolveMode, ValueSolution};

use crate::error::{CoreError, Result};

/// Fully enumerated multi-agent MDP: `n` agents over a shared action set,
/// deterministic transitions, one reward per agent per (state, joint action).
///
/// Joint actions are indexed in base `action_count` with agent 0 as the most
/// significant digit, so tuple order equals numeric order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitMmdp {
    pub state_count: usize,
    pub agent_count: usize,
    pub action_count: usize,
    /// `transition[s * A^n + ja]` = successor state.
    pub transition: Vec<usize>,
    /// `rewards[(s * A^n + ja) * n + i]` = reward of agent `i`.
    pub rewards: Vec<f64>,
    pub initial_state: usize,
    pub horizon: usize,
}

impl ExplicitMmdp {
    /// Number of joint actions `|A|^n`.
    pub fn joint_action_count(&self) -> usize {
        self.action_count.pow(self.agent_count as u32)
    }

    /// Joint-action index of an individual-action tuple.
    pub fn joint_index(&self, actions: &[usize]) -> usize {
        debug_assert_eq!(actions.len(), self.agent_count);
        actions
            .iter()
            .fold(0, |acc, &a| acc * self.action_count + a)
    }

    /// Individual-action tuple of a joint-action index.
    pub fn joint_tuple(&self, mut ja: usize) -> Vec<usize> {
        let mut out = vec![0; self.agent_count];
        for slot in out.iter_mut().rev() {
            *slot = ja % self.action_count;
            ja /= self.action_count;
        }
        out
    }

    pub fn transition(&self, state: usize, ja: usize) -> usize {
        self.transition[state * self.joint_action_count() + ja]
    }

    /// Per-agent rewards for (state, joint action).
    pub fn agent_rewards(&self, state: usize, ja: usize) -> &[f64] {
        let base = (state * self.joint_action_count() + ja) * self.agent_count;
        &self.rewards[base..base + self.agent_count]
    }

    /// Summed reward over all agents.
    pub fn summed_reward(&self, state: usize, ja: usize) -> f64 {
        self.agent_rewards(state, ja).iter().sum()
    }

    /// Validates table sizes and entry ranges.
    pub fn validate(&self) -> Result<()> {
        if self.state_count == 0 || self.agent_count == 0 || self.action_count == 0 {
            return Err(CoreError::InvalidInput(
                "state, agent, and action counts must be positive".into(),
            ));
        }
        let pairs = self.state_count * self.joint_action_count();
        if self.transition.len() != pairs {
            return Err(CoreError::InvalidInput(format!(
                "transition table has {} entries, expected {}",
                self.transition.len(),
                pairs
            )));
        }
        if self.rewards.len() != pairs * self.agent_count {
            return Err(CoreError::InvalidInput(format!(
                "reward table has {} entries, expected {}",
                self.rewards.len(),
                pairs * self.agent_count
            )));
        }
        if self.transition.iter().any(|&s| s >= self.state_count) {
            return Err(CoreError::InvalidInput(
                "transition table references an out-of-range state".into(),
            ));
        }
        if self.initial_state >= self.state_count {
            return Err(CoreError::InvalidInput(
                "initial state out of range".into(),
            ));
        }
        Ok(())
    }

    /// Serializes to the line-oriented text format (see [`ExplicitMmdp::from_text`]).
    pub fn to_text(&self) -> String {
        text::to_text(self)
    }

    /// Parses the line-oriented text format:
    ///
    /// ```text
    /// mmdp 1
    /// <states> <agents> <actions> <initial> <horizon>
    /// <state> <joint-action> <next-state> <r_1> ... <r_n>
    /// ```
    ///
    /// with one body line per (state, joint-action) pair and `#` comments.
    pub fn from_text(input: &str) -> Result<Self> {
        text::from_text(input)
    }
}

/// Fully enumerated single-agent MDP with deterministic transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitMdp {
    pub state_count: usize,
    pub action_count: usize,
    /// `transition[s * action_count + a]` = successor state.
    pub transition: Vec<usize>,
    /// `reward[s * action_count + a]`.
    pub reward: Vec<f64>,
    pub initial_state: usize,
    pub horizon: usize,
}

impl ExplicitMdp {
    pub fn transition(&self, state: usize, action: usize) -> usize {
        self.transition[state * self.action_count + action]
    }

    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.reward[state * self.action_count + action]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_index_round_trip() {
        let m = random_mmdp(3, 2, 3, 4, 2);
        for ja in 0..m.joint_action_count() {
            assert_eq!(m.joint_index(&m.joint_tuple(ja)), ja);
        }
        // agent 0 is the most significant digit
        assert_eq!(m.joint_index(&[1, 0, 0]), 16);
        assert_eq!(m.joint_index(&[0, 0, 1]), 1);
    }

    #[test]
    fn validate_catches_bad_tables() {
        let mut m = random_mmdp(0, 2, 2, 2, 3);
        assert!(m.validate().is_ok());
        m.transition[0] = 99;
        assert!(m.validate().is_err());
    }
}
