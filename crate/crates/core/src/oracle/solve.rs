//! Exact solvers: value iteration (finite and infinite horizon) and
//! exhaustive open-loop plan enumeration.

use super::ExplicitMdp;
use crate::error::{CoreError, Result};

/// Solution mode for [`value_iteration`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    /// Exact backward induction over the MDP's `horizon` stages.
    FiniteHorizon,
    /// Iterate the Bellman operator until the maximum value change drops
    /// below `tolerance`. Requires `gamma < 1`.
    Infinite { tolerance: f64 },
}

/// Optimal values and a greedy policy.
///
/// Finite horizon: `values[t][s]` is the optimal return from `s` with
/// `horizon - t` stages remaining (`values` has `horizon + 1` rows, the last
/// all zero) and `greedy_policy[t][s]` the maximizing action at stage `t`.
/// Infinite horizon: one row each. Argmax ties break to the lowest action
/// index.
#[derive(Debug, Clone)]
pub struct ValueSolution {
    pub values: Vec<Vec<f64>>,
    pub greedy_policy: Vec<Vec<usize>>,
}

impl ValueSolution {
    /// Optimal value of `state` at the start (stage 0 / converged values).
    pub fn initial_value(&self, state: usize) -> f64 {
        self.values[0][state]
    }

    /// Greedy action at `stage` (ignored in infinite mode) and `state`.
    pub fn greedy_action(&self, stage: usize, state: usize) -> usize {
        let row = stage.min(self.greedy_policy.len() - 1);
        self.greedy_policy[row][state]
    }
}

fn bellman_backup(
    mdp: &ExplicitMdp,
    next_values: &[f64],
    gamma: f64,
    state: usize,
) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut best_action = 0;
    for action in 0..mdp.action_count {
        let q = mdp.reward(state, action) + gamma * next_values[mdp.transition(state, action)];
        if q > best {
            best = q;
            best_action = action;
        }
    }
    (best, best_action)
}

/// Solves `mdp` exactly.
pub fn value_iteration(mdp: &ExplicitMdp, gamma: f64, mode: SolveMode) -> Result<ValueSolution> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(CoreError::InvalidInput(format!(
            "gamma {gamma} outside [0, 1]"
        )));
    }
    match mode {
        SolveMode::FiniteHorizon => {
            let mut values = vec![vec![0.0; mdp.state_count]; mdp.horizon + 1];
            let mut policy = vec![vec![0usize; mdp.state_count]; mdp.horizon];
            for t in (0..mdp.horizon).rev() {
                for s in 0..mdp.state_count {
                    let (v, a) = bellman_backup(mdp, &values[t + 1], gamma, s);
                    values[t][s] = v;
                    policy[t][s] = a;
                }
            }
            Ok(ValueSolution {
                values,
                greedy_policy: policy,
            })
        }
        SolveMode::Infinite { tolerance } => {
            if gamma >= 1.0 {
                return Err(CoreError::InvalidInput(
                    "infinite-horizon mode requires gamma < 1".into(),
                ));
            }
            if tolerance <= 0.0 {
                return Err(CoreError::InvalidInput(
                    "tolerance must be positive".into(),
                ));
            }
            let mut values = vec![0.0; mdp.state_count];
            loop {
                let mut next = vec![0.0; mdp.state_count];
                let mut delta: f64 = 0.0;
                for s in 0..mdp.state_count {
                    let (v, _) = bellman_backup(mdp, &values, gamma, s);
                    delta = delta.max((v - values[s]).abs());
                    next[s] = v;
                }
                values = next;
                if delta < tolerance {
                    break;
                }
            }
            let policy = (0..mdp.state_count)
                .map(|s| bellman_backup(mdp, &values, gamma, s).1)
                .collect();
            Ok(ValueSolution {
                values: vec![values],
                greedy_policy: vec![policy],
            })
        }
    }
}

/// Best discounted return over every open-loop action sequence of length
/// `horizon` from the initial state. For deterministic MDPs this equals the
/// finite-horizon optimum, making it an independent check on both MDP
/// builders and the solver.
pub fn best_open_loop_return(mdp: &ExplicitMdp, gamma: f64) -> Result<f64> {
    let plan_count = (mdp.action_count as u64).checked_pow(mdp.horizon as u32);
    match plan_count {
        Some(c) if c <= 10_000_000 => {}
        _ => {
            return Err(CoreError::SizeGuard(format!(
                "{}^{} open-loop plans exceed the enumeration limit",
                mdp.action_count, mdp.horizon
            )))
        }
    }

    fn search(mdp: &ExplicitMdp, state: usize, depth: usize, gamma: f64) -> f64 {
        if depth == mdp.horizon {
            return 0.0;
        }
        let mut best = f64::NEG_INFINITY;
        for action in 0..mdp.action_count {
            let value = mdp.reward(state, action)
                + gamma * search(mdp, mdp.transition(state, action), depth + 1, gamma);
            if value > best {
                best = value;
            }
        }
        best
    }

    Ok(search(mdp, mdp.initial_state, 0, gamma))
}
