//! Experiment orchestration: configs, replications, artifacts and offline diagnostics.

pub mod config;
pub mod diagnostics;
pub mod experiment;
pub mod plot;

pub use config::{Experiment, ExperimentConfig, Overrides, PolicySource};
pub use diagnostics::{
    excess_regret_diagnostic, locate_block, partition_for_env, partition_interval, ExcessRegret, PartitionPiece,
    PartitionReport, THEORY_D3,
};
pub use experiment::{
    run_dir, run_experiment, run_experiment_in_memory, Aggregate, AlgorithmAggregate, ExperimentReport, MeanStderr,
    RunSummary,
};
pub use plot::{emit_plot_data, list_runs};
