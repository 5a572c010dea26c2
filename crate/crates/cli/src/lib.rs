//! Operational harness around `supervisor-core`: task configuration,
//! training/evaluation/verification subcommands, metrics persistence, and
//! rollout inspection.

pub mod commands;
pub mod config;
pub mod envs;
pub mod eval;
