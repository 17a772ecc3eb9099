//! Configuration files, checkpoints, tables and verdicts, a rayon executor,
//! and the subcommands of the `prandtl` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;

pub use error::CliError;
