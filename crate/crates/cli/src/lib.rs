//! Configuration, orchestration and artifact writing for the `sdre` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

pub use config::ExperimentConfig;
pub use error::CliError;
