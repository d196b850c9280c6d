//! Library surface of the command-line driver, exposed separately so the
//! integration tests can exercise runs without spawning processes.

pub mod config;
pub mod runner;

pub use config::{RunConfig, SWEEP_PARAMETERS};
pub use runner::{diverged, print_report, run, sweep, RunOutputs};
