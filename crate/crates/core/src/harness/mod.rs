//! Training and evaluation harness: run configuration, seeded training
//! loop, metrics files, curve plots and dominant-action heatmaps.

mod config;
mod eval;
mod heatmap;
mod metrics;
mod plot;
mod seeds;
mod train;

use thiserror::Error;

use crate::gridworld::GridError;
use crate::observe::ObserveError;
use crate::optimize::OptimError;

pub use config::{
    default_budget, EnvFamily, EnvSuite, EvalSet, RunConfig, TrainingMode, DEFAULT_EVAL_EPISODES,
    DEFAULT_EVAL_INTERVAL, POOL_BASE_SEED, SHIFT_THRESHOLD,
};
pub use eval::{evaluate, greedy_actions};
pub use heatmap::{dominant_action_heatmap, GreedyOutcome, Heatmap};
pub use metrics::{mean_ci95, metrics_from_csv, metrics_to_csv, read_metrics, write_metrics, MetricRecord, METRICS_HEADER};
pub use plot::{aggregate, plot_curves, CurveSet};
pub use seeds::{splitmix64, SeedStreams};
pub use train::{run_experiment, sample_layout_index, train, train_on, validate_and_evaluate, TrainOutcome};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Observe(#[from] ObserveError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}
