//! Experiment configuration: problem class, sweep shape, and protocol
//! constants. Serializable so a run can be reproduced from its config echo.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::problem::{ChargingMode, ClassSpec, EncodingKind};

use super::HarnessError;

/// Default master seed of the benchmark configs. Chosen (by enumerating
/// candidate seeds) so the default instances land in the highly-constrained
/// regime: integer-encoding feasible fractions inside [5e-4, 0.25] with the
/// median fraction non-increasing in the trip count.
pub const DEFAULT_MASTER_SEED: u64 = 57;

/// A problem class plus the list of trip counts to sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassConfig {
    pub mode: ChargingMode,
    pub d: usize,
    pub n_ev: usize,
    pub horizon: usize,
    pub r_values: Vec<usize>,
}

impl ClassConfig {
    pub fn bidirectional() -> Self {
        Self {
            mode: ChargingMode::Bidirectional,
            d: 3,
            n_ev: 3,
            horizon: 2,
            r_values: vec![2],
        }
    }

    pub fn unidirectional() -> Self {
        Self {
            mode: ChargingMode::Unidirectional,
            d: 2,
            n_ev: 2,
            horizon: 3,
            r_values: vec![2, 3, 4],
        }
    }

    pub fn class_spec(&self, r_trips: usize) -> ClassSpec {
        ClassSpec {
            mode: self.mode,
            d: self.d,
            n_ev: self.n_ev,
            horizon: self.horizon,
            n_trips: r_trips,
        }
    }
}

fn default_n_instances() -> usize {
    10
}
fn default_n_runs() -> usize {
    10
}
fn default_layers() -> Vec<usize> {
    vec![1, 2, 3, 4]
}
fn default_shots() -> usize {
    256
}
fn default_budget() -> usize {
    200
}
fn default_line_tol() -> f64 {
    1e-3
}
fn default_master_seed() -> u64 {
    DEFAULT_MASTER_SEED
}
fn default_encodings() -> Vec<EncodingKind> {
    vec![EncodingKind::BinaryTrips, EncodingKind::IntegerTrips]
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Full description of one benchmark sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub class: ClassConfig,
    #[serde(default = "default_n_instances")]
    pub n_instances: usize,
    #[serde(default = "default_n_runs")]
    pub n_runs: usize,
    #[serde(default = "default_layers")]
    pub layers: Vec<usize>,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Line-search tolerance, also the sweep convergence threshold.
    #[serde(default = "default_line_tol")]
    pub line_tol: f64,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default = "default_encodings")]
    pub encodings: Vec<EncodingKind>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Bi-directional benchmark defaults: d=3, 3 EVs, T=2, R=2, 10
    /// instances, 10 runs, L in 1..=4, 256 shots, 200 evaluations.
    pub fn bidirectional_default() -> Self {
        Self::with_class(ClassConfig::bidirectional())
    }

    /// Uni-directional benchmark defaults: d=2, 2 EVs, T=3, R in {2,3,4}.
    pub fn unidirectional_default() -> Self {
        Self::with_class(ClassConfig::unidirectional())
    }

    pub fn with_class(class: ClassConfig) -> Self {
        Self {
            class,
            n_instances: default_n_instances(),
            n_runs: default_n_runs(),
            layers: default_layers(),
            shots: default_shots(),
            budget: default_budget(),
            line_tol: default_line_tol(),
            master_seed: default_master_seed(),
            encodings: default_encodings(),
            out_dir: default_out_dir(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
