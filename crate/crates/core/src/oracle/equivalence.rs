//! Equivalence checks between the joint-action MDP and the compiled
//! supervisor MDP of the same MMDP.
//!
//! Three independent routes must agree on small instances:
//!
//! 1. undiscounted finite-horizon optimum of the joint MDP,
//! 2. undiscounted finite-horizon optimum of the compiled MDP,
//! 3. exhaustive open-loop plan enumeration.
//!
//! Discounting relates the two MDPs through the meta-step geometry: the
//! `t`-th environment reward arrives at meta-step `t*n + n - 1`, so with
//! `gamma_meta = gamma^(1/n)` the compiled optimum equals
//! `gamma^((n-1)/n)` times the joint optimum.

use super::{
    best_open_loop_return, build_compiled_mdp, build_joint_mdp, value_iteration,
    CompiledIndex, ExplicitMmdp, SolveMode,
};
use crate::error::Result;

/// Tolerance for every value comparison in the equivalence suite.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// Values gathered by [`check_equivalence`]; `passes` decides against
/// [`EQUIVALENCE_TOLERANCE`].
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub gamma_env: f64,
    /// Undiscounted finite-horizon optimum of the joint-action MDP.
    pub joint_undiscounted: f64,
    /// Undiscounted finite-horizon optimum of the compiled MDP.
    pub compiled_undiscounted: f64,
    /// Best open-loop plan return of the joint MDP (third route).
    pub enumeration_undiscounted: f64,
    /// Joint optimum under `gamma_env`.
    pub joint_discounted: f64,
    /// Compiled optimum under `gamma_meta = gamma_env^(1/n)`.
    pub compiled_discounted: f64,
    /// `gamma_env^((n-1)/n) * joint_discounted`, what `compiled_discounted`
    /// must equal.
    pub compiled_discounted_expected: f64,
    /// Backup value at `s_0` of the joint action reconstructed from `n`
    /// greedy compiled steps (undiscounted).
    pub reconstructed_joint_value: f64,
    /// The joint MDP's own optimal backup value at `s_0` (undiscounted).
    pub optimal_joint_value: f64,
}

impl EquivalenceReport {
    pub fn max_deviation(&self) -> f64 {
        [
            (self.joint_undiscounted - self.compiled_undiscounted).abs(),
            (self.joint_undiscounted - self.enumeration_undiscounted).abs(),
            (self.compiled_discounted - self.compiled_discounted_expected).abs(),
            (self.reconstructed_joint_value - self.optimal_joint_value).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.max_deviation() <= EQUIVALENCE_TOLERANCE
    }
}

/// Solves both MDPs derived from `m` and reports whether their optima agree,
/// undiscounted and under the `gamma_meta = gamma_env^(1/n)` relation.
pub fn check_equivalence(m: &ExplicitMmdp, gamma_env: f64) -> Result<EquivalenceReport> {
    let joint = build_joint_mdp(m)?;
    let compiled = build_compiled_mdp(m)?;
    let n = m.agent_count as f64;

    let joint_plain = value_iteration(&joint, 1.0, SolveMode::FiniteHorizon)?;
    let compiled_plain = value_iteration(&compiled, 1.0, SolveMode::FiniteHorizon)?;
    let enumeration = best_open_loop_return(&joint, 1.0)?;

    let gamma_meta = gamma_env.powf(1.0 / n);
    let joint_disc = value_iteration(&joint, gamma_env, SolveMode::FiniteHorizon)?;
    let compiled_disc = value_iteration(&compiled, gamma_meta, SolveMode::FiniteHorizon)?;

    // Reconstruct the first joint action by following the compiled greedy
    // policy for n meta-steps, then back it up in the joint MDP.
    let index = CompiledIndex::new(m.agent_count, m.action_count);
    let mut meta = compiled.initial_state;
    let mut actions = Vec::with_capacity(m.agent_count);
    for stage in 0..m.agent_count {
        let a = compiled_plain.greedy_action(stage, meta);
        actions.push(a);
        meta = compiled.transition(meta, a);
    }
    let ja = m.joint_index(&actions);
    let reconstructed_value = joint.reward(m.initial_state, ja)
        + joint_plain.values[1][joint.transition(m.initial_state, ja)];
    debug_assert_eq!(meta, index.meta_index(m.transition(m.initial_state, ja), &[]));

    Ok(EquivalenceReport {
        gamma_env,
        joint_undiscounted: joint_plain.initial_value(joint.initial_state),
        compiled_undiscounted: compiled_plain.initial_value(compiled.initial_state),
        enumeration_undiscounted: enumeration,
        joint_discounted: joint_disc.initial_value(joint.initial_state),
        compiled_discounted: compiled_disc.initial_value(compiled.initial_state),
        compiled_discounted_expected: gamma_env.powf((n - 1.0) / n)
            * joint_disc.initial_value(joint.initial_state),
        reconstructed_joint_value: reconstructed_value,
        optimal_joint_value: joint_plain.initial_value(joint.initial_state),
    })
}
