//! Compilation of a multi-agent environment into a single-agent MDP via
//! sequential action assignment.
//!
//! A [`CompiledEnv`] wraps any [`MultiAgentEnv`]. Each meta-step assigns one
//! individual action to the next agent in order; the `n`-th assignment
//! completes a joint action, executes it in the wrapped environment, and
//! resets the assignment list. Meta-rewards are zero on non-completing steps
//! and the sum of the per-agent rewards on completing steps, so cumulative
//! meta-reward equals cumulative summed environment reward exactly.
//!
//! Also houses exact space-size accounting: the joint action space grows as
//! `|A|^n` while the compiled action space stays at `|A|`, trading the
//! explosion into the meta-state space (`|S'| = |S| * sum_{i=0..=n} |A|^i`).

use crate::error::{CoreError, Result};
use crate::mdp::{AgentAction, AssignmentList, MetaState, MultiAgentEnv};
use crate::oracle::ExplicitMmdp;
use std::collections::{HashSet, VecDeque};

/// How a discount factor is meant to be applied to compiled-MDP rewards.
///
/// The compiled environment itself never discounts; this tag records the
/// convention its consumer should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiscountHandling {
    /// Discount once per meta-step. The trainer's convention: it sees only
    /// the compiled MDP.
    #[default]
    PerMetaStep,
    /// Discount once per environment step: apply `gamma^(1/n)` per meta-step
    /// so that `n` assignments compound to one environment-step discount.
    PerEnvStep,
}

/// Outcome of one supervisor meta-step.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaStepResult<S> {
    pub next: MetaState<S>,
    pub meta_reward: f64,
    /// True iff this step completed an assignment and the wrapped
    /// environment advanced.
    pub env_stepped: bool,
    pub terminal: bool,
}

/// Resets `env` with `seed` and returns the initial meta-state: the
/// environment's initial state paired with an all-unassigned list.
pub fn initial_meta_state<E: MultiAgentEnv>(env: &mut E, seed: u64) -> MetaState<E::State> {
    let env_state = env.reset(seed);
    MetaState {
        env_state,
        assignments: AssignmentList::empty(env.agent_count()),
    }
}

/// A multi-agent environment compiled into a single-agent MDP.
///
/// The meta-action set is isomorphic to the individual action set: action
/// `a` means "assign `a` to the next unassigned agent".
#[derive(Debug)]
pub struct CompiledEnv<E: MultiAgentEnv> {
    inner: E,
    assignments: AssignmentList,
    terminal: bool,
    gamma_policy: DiscountHandling,
}

impl<E: MultiAgentEnv> CompiledEnv<E> {
    /// Wraps `inner`, resetting it with `seed`.
    pub fn new(inner: E, seed: u64) -> Self {
        let mut compiled = CompiledEnv {
            assignments: AssignmentList::empty(inner.agent_count()),
            inner,
            terminal: false,
            gamma_policy: DiscountHandling::default(),
        };
        compiled.reset(seed);
        compiled
    }

    pub fn with_discount_handling(mut self, policy: DiscountHandling) -> Self {
        self.gamma_policy = policy;
        self
    }

    pub fn gamma_policy(&self) -> DiscountHandling {
        self.gamma_policy
    }

    /// Per-meta-step discount corresponding to `gamma` under this
    /// environment's discount handling.
    pub fn effective_gamma(&self, gamma: f64) -> f64 {
        match self.gamma_policy {
            DiscountHandling::PerMetaStep => gamma,
            DiscountHandling::PerEnvStep => gamma.powf(1.0 / self.agent_count() as f64),
        }
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn agent_count(&self) -> usize {
        self.inner.agent_count()
    }

    /// Size of the meta-action set; always equals the wrapped environment's
    /// individual action count.
    pub fn meta_action_count(&self) -> usize {
        self.inner.action_count()
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    /// Starts a new episode; the assignment list is emptied.
    pub fn reset(&mut self, seed: u64) -> MetaState<E::State> {
        let meta = initial_meta_state(&mut self.inner, seed);
        self.assignments = meta.assignments.clone();
        self.terminal = false;
        meta
    }

    /// Current meta-state snapshot.
    pub fn current(&self) -> MetaState<E::State> {
        MetaState {
            env_state: self.inner.state(),
            assignments: self.assignments.clone(),
        }
    }

    /// Meta-observation of the current meta-state: the wrapped environment's
    /// observation followed by the encoded assignment list.
    pub fn observe_meta(&self, mode: crate::mdp::ObservationMode) -> Vec<f64> {
        crate::mdp::encode_meta_observation(
            &self.inner.observe(mode),
            &self.assignments,
            self.inner.action_count(),
        )
    }

    /// Meta-observation length: `|s| + n`.
    pub fn meta_observation_len(&self, mode: crate::mdp::ObservationMode) -> usize {
        self.inner.observation_len(mode) + self.inner.agent_count()
    }

    /// Applies one meta-action.
    ///
    /// With more than one slot open, the action is written into the first
    /// unassigned slot: the environment does not advance and the meta-reward
    /// is zero. With exactly one slot open, the completed joint action
    /// executes in the wrapped environment, the meta-reward is the sum of the
    /// per-agent rewards, and the assignment list resets.
    pub fn step(&mut self, meta_action: AgentAction) -> Result<MetaStepResult<E::State>> {
        if self.terminal {
            return Err(CoreError::ContractViolation(
                "step on a terminal episode; call reset first".into(),
            ));
        }
        if meta_action.index() >= self.meta_action_count() {
            return Err(CoreError::InvalidInput(format!(
                "meta-action index {} out of range (|A'| = {})",
                meta_action.index(),
                self.meta_action_count()
            )));
        }

        if self.assignments.count_unassigned() > 1 {
            self.assignments.assign_next(meta_action)?;
            return Ok(MetaStepResult {
                next: self.current(),
                meta_reward: 0.0,
                env_stepped: false,
                terminal: false,
            });
        }

        // Last open slot: complete the joint action and execute it.
        self.assignments.assign_next(meta_action)?;
        let joint = self.assignments.to_joint_action()?;
        let result = self.inner.execute(&joint)?;
        let meta_reward = result.rewards.iter().sum();
        self.assignments = AssignmentList::empty(self.agent_count());
        self.terminal = result.terminal;
        Ok(MetaStepResult {
            next: MetaState {
                env_state: result.next_state,
                assignments: self.assignments.clone(),
            },
            meta_reward,
            env_stepped: true,
            terminal: result.terminal,
        })
    }
}

/// `|A|^n`, the size of the explicit joint action space, in exact integer
/// arithmetic.
pub fn joint_action_space_size(action_count: u64, n: u32) -> Result<u64> {
    if action_count == 0 {
        return Err(CoreError::InvalidInput(
            "joint_action_space_size requires at least one action".into(),
        ));
    }
    action_count.checked_pow(n).ok_or_else(|| {
        CoreError::ArithmeticRange(format!("{action_count}^{n} exceeds u64 range"))
    })
}

/// `|S| * sum_{i=0..=n} |A|^i`, the number of meta-states every environment
/// state expands into (counting the instantaneously consumed fully assigned
/// lists), in exact integer arithmetic.
pub fn meta_state_space_size(state_count: u64, action_count: u64, n: u32) -> Result<u64> {
    if state_count == 0 || action_count == 0 {
        return Err(CoreError::InvalidInput(
            "meta_state_space_size requires positive state and action counts".into(),
        ));
    }
    let multiplier = assignment_prefix_count(action_count, n as u64 + 1)?;
    state_count.checked_mul(multiplier).ok_or_else(|| {
        CoreError::ArithmeticRange(format!(
            "{state_count} * sum_i {action_count}^i exceeds u64 range"
        ))
    })
}

/// `sum_{k=0}^{terms-1} action_count^k` with overflow detection.
pub(crate) fn assignment_prefix_count(action_count: u64, terms: u64) -> Result<u64> {
    let mut total: u64 = 0;
    let mut power: u64 = 1;
    for k in 0..terms {
        total = total.checked_add(power).ok_or_else(|| {
            CoreError::ArithmeticRange("geometric sum exceeds u64 range".into())
        })?;
        if k + 1 < terms {
            power = power.checked_mul(action_count).ok_or_else(|| {
                CoreError::ArithmeticRange(format!(
                    "{action_count}^{} exceeds u64 range",
                    k + 1
                ))
            })?;
        }
    }
    Ok(total)
}

/// Enumerates, breadth-first from the initial meta-state, every meta-state at
/// which the supervisor chooses an action (assignment list not yet full), and
/// returns the count.
///
/// Only environment states reachable under some action sequence are visited,
/// so on a fully reachable MMDP the count equals
/// `|S| * sum_{k=0}^{n-1} |A|^k`.
pub fn reachable_decision_states(mmdp: &ExplicitMmdp) -> Result<u64> {
    let per_state =
        assignment_prefix_count(mmdp.action_count as u64, mmdp.agent_count as u64)?;
    let bound = (mmdp.state_count as u64)
        .checked_mul(per_state)
        .ok_or_else(|| CoreError::ArithmeticRange("decision-state bound overflow".into()))?;
    if bound > 10_000_000 {
        return Err(CoreError::SizeGuard(format!(
            "decision-state enumeration of {bound} states refused (limit 10^7)"
        )));
    }

    // A decision state is (env state, action prefix of length < n).
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
    let mut queue: VecDeque<(usize, Vec<usize>)> = VecDeque::new();
    let start = (mmdp.initial_state, Vec::new());
    seen.insert(start.clone());
    queue.push_back(start);

    while let Some((state, prefix)) = queue.pop_front() {
        for action in 0..mmdp.action_count {
            let mut next_prefix = prefix.clone();
            next_prefix.push(action);
            let successor = if next_prefix.len() < mmdp.agent_count {
                (state, next_prefix)
            } else {
                let ja = mmdp.joint_index(&next_prefix);
                (mmdp.transition(state, ja), Vec::new())
            };
            if seen.insert(successor.clone()) {
                queue.push_back(successor);
            }
        }
    }
    Ok(seen.len() as u64)
}
