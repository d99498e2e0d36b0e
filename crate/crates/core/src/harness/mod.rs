//! Experiment orchestration: JSON configs, deterministic parallel Monte
//! Carlo over sample indices, statistical comparison between ensembles, and
//! CSV/JSON report emission.

mod config;
mod report;
mod runner;

pub use config::{
    parse_config, AtomSpec, CompareConfig, CompareThresholds, ConfigError, EnsembleSpec,
    ExperimentConfig, OuTime, StatisticSpec, TestFunctionSpec, WindowSpec,
};
pub use report::{ks_distance, universality_compare, ComparisonReport};
pub use runner::{run_experiment, HarnessError, Outcome, RunOptions, RunSummary};
