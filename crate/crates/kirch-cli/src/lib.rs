//! Command-line frontend and experiment harness for the balance-matrix
//! learner in `kirch-core`: file formats, config schemas, the seeded
//! Monte-Carlo driver, and the `kirch` binary's command implementations.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
