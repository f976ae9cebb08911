//! Experiment harness for the accelerated stochastic quasi-Newton trainer:
//! config parsing, the training loop with CSV metrics, and the
//! verification commands behind the CLI.

pub mod commands;
pub mod config;
pub mod experiment;
