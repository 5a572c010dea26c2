//! Builders for the two explicit MDPs derived from an MMDP: the joint-action
//! MDP and the compiled supervisor MDP.

use super::{ExplicitMdp, ExplicitMmdp};
use crate::error::{CoreError, Result};

const BUILD_GUARD: u64 = 1_000_000;

/// Expands an MMDP into the explicit joint-action MDP: same states,
/// `|A|^n` actions, rewards summed over agents.
pub fn build_joint_mdp(m: &ExplicitMmdp) -> Result<ExplicitMdp> {
    m.validate()?;
    let ja_count = (m.action_count as u64)
        .checked_pow(m.agent_count as u32)
        .filter(|&c| c <= BUILD_GUARD)
        .ok_or_else(|| {
            CoreError::SizeGuard(format!(
                "{}^{} joint actions exceed the build limit",
                m.action_count, m.agent_count
            ))
        })? as usize;

    let mut transition = Vec::with_capacity(m.state_count * ja_count);
    let mut reward = Vec::with_capacity(m.state_count * ja_count);
    for s in 0..m.state_count {
        for ja in 0..ja_count {
            transition.push(m.transition(s, ja));
            reward.push(m.summed_reward(s, ja));
        }
    }
    Ok(ExplicitMdp {
        state_count: m.state_count,
        action_count: ja_count,
        transition,
        reward,
        initial_state: m.initial_state,
        horizon: m.horizon,
    })
}

/// Canonical indexing of compiled meta-states.
///
/// A meta-state at which the supervisor decides is `(s, p)` with `p` an
/// action prefix of length `k < n`. Prefixes are ordered by length, then
/// lexicographically; meta-state index = `s * prefixes_per_state + offset(p)`.
#[derive(Debug, Clone)]
pub struct CompiledIndex {
    pub agent_count: usize,
    pub action_count: usize,
    /// `sum_{k=0}^{n-1} |A|^k`
    pub prefixes_per_state: usize,
    /// `length_base[k]` = number of prefixes strictly shorter than `k`.
    length_base: Vec<usize>,
}

impl CompiledIndex {
    pub fn new(agent_count: usize, action_count: usize) -> Self {
        let mut length_base = Vec::with_capacity(agent_count + 1);
        let mut total = 0usize;
        let mut power = 1usize;
        for _ in 0..=agent_count {
            length_base.push(total);
            total += power;
            power *= action_count;
        }
        CompiledIndex {
            agent_count,
            action_count,
            prefixes_per_state: length_base[agent_count],
            length_base,
        }
    }

    /// Index of the meta-state `(state, prefix)`.
    pub fn meta_index(&self, state: usize, prefix: &[usize]) -> usize {
        debug_assert!(prefix.len() < self.agent_count || self.agent_count == 0);
        let value = prefix.iter().fold(0, |acc, &a| acc * self.action_count + a);
        state * self.prefixes_per_state + self.length_base[prefix.len()] + value
    }

    /// Inverse of [`CompiledIndex::meta_index`].
    pub fn meta_state(&self, index: usize) -> (usize, Vec<usize>) {
        let state = index / self.prefixes_per_state;
        let mut offset = index % self.prefixes_per_state;
        let mut len = 0;
        while len + 1 < self.length_base.len() && self.length_base[len + 1] <= offset {
            len += 1;
        }
        offset -= self.length_base[len];
        let mut prefix = vec![0; len];
        for slot in prefix.iter_mut().rev() {
            *slot = offset % self.action_count;
            offset /= self.action_count;
        }
        (state, prefix)
    }
}

/// Compiles an MMDP into the supervisor MDP: meta-states are (state, action
/// prefix) pairs, actions assign one individual action, non-completing
/// transitions pay zero, completing transitions execute the joint action and
/// pay the summed reward. The horizon stretches to `n` meta-steps per
/// environment step.
///
/// Every (state, prefix) pair is materialized, reachable or not, so the
/// state count equals `|S| * sum_{k=0}^{n-1} |A|^k` by construction.
pub fn build_compiled_mdp(m: &ExplicitMmdp) -> Result<ExplicitMdp> {
    m.validate()?;
    let index = CompiledIndex::new(m.agent_count, m.action_count);
    let meta_states = (m.state_count as u64)
        .checked_mul(index.prefixes_per_state as u64)
        .filter(|&c| c <= BUILD_GUARD)
        .ok_or_else(|| {
            CoreError::SizeGuard(format!(
                "{} * {} meta-states exceed the build limit",
                m.state_count, index.prefixes_per_state
            ))
        })? as usize;

    let mut transition = vec![0usize; meta_states * m.action_count];
    let mut reward = vec![0.0; meta_states * m.action_count];
    for meta in 0..meta_states {
        let (state, prefix) = index.meta_state(meta);
        for action in 0..m.action_count {
            let slot = meta * m.action_count + action;
            let mut extended = prefix.clone();
            extended.push(action);
            if extended.len() < m.agent_count {
                transition[slot] = index.meta_index(state, &extended);
            } else {
                let ja = m.joint_index(&extended);
                transition[slot] = index.meta_index(m.transition(state, ja), &[]);
                reward[slot] = m.summed_reward(state, ja);
            }
        }
    }

    Ok(ExplicitMdp {
        state_count: meta_states,
        action_count: m.action_count,
        transition,
        reward,
        initial_state: index.meta_index(m.initial_state, &[]),
        horizon: m.horizon * m.agent_count,
    })
}
