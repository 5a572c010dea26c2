//! Centralized multi-agent reinforcement learning through sequential
//! construction of joint actions.
//!
//! Instead of training a centralized policy over the joint action space
//! `A^n` (exponential in the number of agents), a *supervisor* meta-agent
//! assigns one individual action per meta-step, in fixed agent order. Once
//! every agent holds an assignment the joint action executes in the wrapped
//! environment. The meta-agent therefore acts in a space of size `|A|`,
//! at the cost of an enriched (meta-)state space.
//!
//! The crate is organized around that idea:
//!
//! - [`mdp`] — shared domain types: actions, assignment lists, meta-states,
//!   and the [`mdp::MultiAgentEnv`] contract.
//! - [`supervisor`] — the compiler from a multi-agent environment to a
//!   single-agent one, plus action/state-space accounting.
//! - [`envs`] — deterministic, seedable cooperative gridworlds (Switch,
//!   TrafficJunction, Combat).
//! - [`oracle`] — explicit tabular MDPs, exact value iteration, and
//!   equivalence checks that prove the compilation preserves optimal values
//!   on small instances.
//! - [`ppo`] — a from-scratch actor-critic PPO (dense networks, manual
//!   backpropagation, Adam) that trains directly on the compiled MDP.

pub mod envs;
pub mod error;
pub mod mdp;
pub mod oracle;
pub mod ppo;
pub mod seeds;
pub mod supervisor;

pub use error::{CoreError, Result};
