//! Experiment harness for nested logit assortment bandits: instance and
//! config file formats, seeded parallel trial execution, and CSV emission.
//!
//! The whole pipeline is a pure function of the config file: instance
//! generation, trial seeds, and trial execution are all derived from
//! `master_seed` with a stable mixer, so reruns are byte-identical.

pub mod config;
pub mod csvio;
pub mod generate;
pub mod instance_io;
pub mod report;
pub mod runner;

pub use config::ExperimentConfig;
pub use runner::{run_cell, run_experiment, summarize, RegretTrace, SummaryRow};
