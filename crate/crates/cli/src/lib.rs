//! Experiment runner behind the `shadowqpt` binary.

pub mod output;
pub mod plan;
pub mod runner;
pub mod states;
