//! Experiment runner: configuration, repeated federated runs, sweeps over
//! the hyperparameter search space, aggregation and metric files.

pub mod config;
pub mod metrics;
pub mod net;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod sweep;

pub use config::{DatasetSource, ExperimentConfig};
pub use metrics::{emit_metrics, ConfigResult, Summary};
pub use pipeline::{run_experiment, run_once, RunOptions, RunSummary};
pub use stats::{aggregate_runs, MeanSeries};
pub use sweep::{sweep, GridSpec};
