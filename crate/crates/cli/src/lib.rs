//! Library side of the `ringpoints` command-line tool: the result cache,
//! DIMACS export, shipped reference tables and the subcommands.

pub mod cache;
pub mod commands;
pub mod compute;
pub mod dimacs;
pub mod error;
pub mod expected;
