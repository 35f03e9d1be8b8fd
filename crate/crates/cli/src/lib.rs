//! Experiment harness behind the `npp` binary: configuration handling,
//! CSV/JSON persistence, and the experiment implementations.

pub mod config;
pub mod experiments;
pub mod records;
