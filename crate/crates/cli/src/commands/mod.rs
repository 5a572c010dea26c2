//! Subcommand implementations.

pub mod enumerate;
pub mod evaluate;
pub mod inspect;
pub mod train;
pub mod verify;
