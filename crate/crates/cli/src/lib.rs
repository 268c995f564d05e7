//! Command implementations behind the `vascr` binary.

pub mod commands;
pub mod config;
pub mod output;
