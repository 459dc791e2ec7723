//! Experiment orchestration: benchmark sweeps, metrics, landscape scans,
//! progress traces, and CSV emission.

pub mod config;
pub mod csvio;
pub mod metrics;
pub mod run;
pub mod seeds;

use thiserror::Error;

use crate::oracle::OracleError;
use crate::problem::ProblemError;
use crate::qaoa::QaoaError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Qaoa(#[from] QaoaError),
    #[error("oracle result covers {oracle_size} configurations, register has {register_size}")]
    OracleMismatch { oracle_size: usize, register_size: usize },
    #[error("oracle was enumerated without an energy table; raise keep_table_below")]
    MissingEnergyTable,
    #[error("metrics need at least one sample")]
    EmptySamples,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Config(#[from] serde_json::Error),
}

pub use config::{ClassConfig, ExperimentConfig, DEFAULT_MASTER_SEED};
pub use metrics::{aggregate, compute_metrics, AggregateRow, FiveNum, Metrics};
pub use run::{
    benchmark_instances, landscape_scan, progress_trace, run_benchmark, run_single,
    BenchmarkOutput, InstanceRecord, LandscapeGrid, LandscapePoint, ProgressCurve, RunRecord,
};
