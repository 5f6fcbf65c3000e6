//! Library half of the `dbarlab` binary: config parsing, run records and
//! the command implementations.

pub mod commands;
pub mod config;
pub mod record;
