//! Library half of the `ddro` command: config parsing and the subcommand
//! drivers.

pub mod commands;
pub mod config;
