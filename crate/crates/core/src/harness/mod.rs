//! Training, evaluation, and reporting harness.
//!
//! [`config`] turns a sectioned TOML file into a resolved experiment
//! recipe; [`train`] runs the mini-batch Adam loop with early stopping
//! and cross-resolution evaluation; [`metrics`] defines the relative
//! L2 error and the per-cell record; [`report`] renders records to CSV
//! and SVG. Everything is seed-deterministic: two runs with the same
//! inputs produce byte-identical outputs.

pub mod config;
pub mod metrics;
pub mod report;
pub mod train;

pub use config::{ConfigFile, ResolvedConfig};
pub use metrics::{rl2e, MetricRecord};
pub use train::{
    evaluate_multi_resolution, learning_rate, split_indices, train, train_with, EpochRecord,
    Split, TrainConfig, TrainReport,
};
