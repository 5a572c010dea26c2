//! Shared domain types: actions, joint actions, assignment lists,
//! meta-states, and the multi-agent environment contract.
//!
//! All agents share one individual action set `A`; a joint action is one
//! action per agent, executed simultaneously. An [`AssignmentList`] is the
//! supervisor's partial joint action: a length-`n` sequence whose assigned
//! slots form a prefix (assignments always proceed in agent order).

use crate::error::{CoreError, Result};

/// One element of the shared individual action set, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentAction(pub usize);

impl AgentAction {
    pub fn index(self) -> usize {
        self.0
    }
}

/// One action per agent, executed simultaneously in the environment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointAction(pub Vec<AgentAction>);

impl JointAction {
    pub fn new(actions: Vec<AgentAction>) -> Self {
        JointAction(actions)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        JointAction(indices.iter().copied().map(AgentAction).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[AgentAction] {
        &self.0
    }

    /// Action of agent `i`.
    pub fn action(&self, i: usize) -> AgentAction {
        self.0[i]
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|a| a.index()).collect()
    }
}

/// The supervisor's partial joint action: slot `i` holds the action already
/// assigned to agent `i`, or nothing.
///
/// Invariant: assigned slots form a prefix — if slot `k` is unassigned, so is
/// every later slot. The only mutation, [`AssignmentList::assign_next`],
/// preserves this by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssignmentList {
    slots: Vec<Option<AgentAction>>,
}

impl AssignmentList {
    /// Fresh all-unassigned list for `n` agents.
    pub fn empty(n: usize) -> Self {
        AssignmentList {
            slots: vec![None; n],
        }
    }

    /// Builds a list from raw slots, validating the prefix structure.
    pub fn from_slots(slots: Vec<Option<AgentAction>>) -> Result<Self> {
        let mut seen_hole = false;
        for slot in &slots {
            match slot {
                None => seen_hole = true,
                Some(_) if seen_hole => {
                    return Err(CoreError::InvalidInput(
                        "assignment list is not prefix-structured".into(),
                    ))
                }
                Some(_) => {}
            }
        }
        Ok(AssignmentList { slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Option<AgentAction>] {
        &self.slots
    }

    /// Number of unassigned slots.
    pub fn count_unassigned(&self) -> usize {
        self.slots.iter().filter(|s| s.is_none()).count()
    }

    /// Index of the first unassigned slot; by the prefix invariant this
    /// equals the number of assigned slots. Errors on a fully assigned list.
    pub fn first_unassigned(&self) -> Result<usize> {
        self.slots
            .iter()
            .position(|s| s.is_none())
            .ok_or_else(|| {
                CoreError::ContractViolation(
                    "first_unassigned on a fully assigned list".into(),
                )
            })
    }

    /// Writes `action` into the first unassigned slot.
    pub fn assign_next(&mut self, action: AgentAction) -> Result<usize> {
        let k = self.first_unassigned()?;
        self.slots[k] = Some(action);
        Ok(k)
    }

    pub fn is_full(&self) -> bool {
        self.slots.iter().all(|s| s.is_some())
    }

    /// Converts a fully assigned list into the joint action it denotes.
    pub fn to_joint_action(&self) -> Result<JointAction> {
        let actions: Option<Vec<AgentAction>> = self.slots.iter().copied().collect();
        actions.map(JointAction::new).ok_or_else(|| {
            CoreError::ContractViolation(
                "to_joint_action on a partially assigned list".into(),
            )
        })
    }
}

/// The compiled MDP's state: the wrapped environment's state plus the
/// supervisor's current assignment list.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaState<S> {
    pub env_state: S,
    pub assignments: AssignmentList,
}

/// Outcome of executing one joint action in a multi-agent environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStepResult<S> {
    pub next_state: S,
    /// One reward per agent.
    pub rewards: Vec<f64>,
    pub terminal: bool,
}

/// How an environment is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// Concatenated per-agent local features.
    Individual,
    /// One flattened global grid encoding.
    Collective,
}

impl std::fmt::Display for ObservationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObservationMode::Individual => write!(f, "individual"),
            ObservationMode::Collective => write!(f, "collective"),
        }
    }
}

/// Contract for a cooperative multi-agent environment: `n` agents sharing
/// one action set act simultaneously through [`MultiAgentEnv::execute`].
///
/// Implementations must be deterministic given the reset seed: the same seed
/// and joint-action sequence reproduce the same trajectory exactly. One
/// instance is confined to a single execution context; independent instances
/// may run in parallel.
pub trait MultiAgentEnv {
    /// Snapshot of the environment state, cheap to clone.
    type State: Clone + PartialEq + std::fmt::Debug;

    /// Number of agents `n`.
    fn agent_count(&self) -> usize;

    /// Size of the shared individual action set `|A|`.
    fn action_count(&self) -> usize;

    /// Starts a new episode and returns the initial state.
    fn reset(&mut self, seed: u64) -> Self::State;

    /// Current state snapshot.
    fn state(&self) -> Self::State;

    /// Whether the current episode has ended.
    fn is_terminal(&self) -> bool;

    /// Executes one joint action (exactly one per environment time step).
    fn execute(&mut self, joint: &JointAction) -> Result<EnvStepResult<Self::State>>;

    /// Feature encoding of the current state. The length is fixed per
    /// environment and mode ([`MultiAgentEnv::observation_len`]); all
    /// components lie in `[-1, 1]`.
    fn observe(&self, mode: ObservationMode) -> Vec<f64>;

    /// Length of [`MultiAgentEnv::observe`] for `mode`.
    fn observation_len(&self, mode: ObservationMode) -> usize;

    /// Diagnostic text rendering of the current state.
    fn render(&self) -> String;

    /// Human-readable name for an individual action index.
    fn action_name(&self, action: usize) -> String {
        format!("a{action}")
    }

    /// Validates a joint action against `n` and `|A|`.
    fn validate_joint(&self, joint: &JointAction) -> Result<()> {
        if joint.len() != self.agent_count() {
            return Err(CoreError::InvalidInput(format!(
                "joint action has {} entries, environment has {} agents",
                joint.len(),
                self.agent_count()
            )));
        }
        for (i, a) in joint.actions().iter().enumerate() {
            if a.index() >= self.action_count() {
                return Err(CoreError::InvalidInput(format!(
                    "agent {} action index {} out of range (|A| = {})",
                    i,
                    a.index(),
                    self.action_count()
                )));
            }
        }
        Ok(())
    }
}

/// Concatenates an environment observation with an `n`-length encoding of the
/// assignment list: `-1` for an unassigned slot, otherwise the action index
/// scaled into `[0, 1]`. The result has length `|obs| + n` — the network
/// input size of the compiled MDP.
pub fn encode_meta_observation(
    obs: &[f64],
    assignments: &AssignmentList,
    action_count: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(obs.len() + assignments.len());
    out.extend_from_slice(obs);
    for slot in assignments.slots() {
        out.push(match slot {
            None => -1.0,
            Some(a) if action_count > 1 => a.index() as f64 / (action_count - 1) as f64,
            Some(_) => 0.0,
        });
    }
    out
}
