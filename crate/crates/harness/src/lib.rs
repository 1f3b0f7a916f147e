//! Experiment harness behind the `chancert` binary: configuration,
//! deterministic seed derivation, trial execution and CSV reporting.

pub mod config;
pub mod report;
pub mod runs;
pub mod seed;
