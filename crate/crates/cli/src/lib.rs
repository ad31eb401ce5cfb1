//! Command implementations behind the `splitorder` binary.

pub mod commands;
pub mod input;
pub mod report;
pub mod selfcheck;
