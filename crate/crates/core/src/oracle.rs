//! Exhaustive enumeration over the full configuration space: exact optimum,
//! optimal set, feasible count, and per-instance statistics.

use rayon::prelude::*;
use thiserror::Error;

use crate::problem::{build_register, evaluate, EncodingKind, ProblemError, ProblemInstance};

/// Optimal-set membership tolerance on the penalized energy.
const OPTIMAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("configuration space of size {total} exceeds the enumeration cap {cap}")]
    SizeCapExceeded { total: usize, cap: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Controls for [`enumerate_with`].
#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    /// Refuse configuration spaces larger than this.
    pub size_cap: usize,
    /// Retain the full energy table when the space is at most this large.
    pub keep_table_below: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self { size_cap: 1_000_000, keep_table_below: 100_000 }
    }
}

/// Result of a full enumeration.
#[derive(Debug, Clone)]
pub struct EnumerationResult {
    /// Minimum penalized energy over all configurations.
    pub ground_energy: f64,
    /// Sorted flat indices whose energy equals the minimum within 1e-12.
    pub optimal_set: Vec<usize>,
    pub feasible_count: usize,
    pub total_count: usize,
    /// Penalized energy per flat index, kept for reuse as the QAOA diagonal.
    pub energy_table: Option<Vec<f64>>,
}

impl EnumerationResult {
    pub fn feasible_fraction(&self) -> f64 {
        self.feasible_count as f64 / self.total_count as f64
    }

    pub fn optimal_fraction(&self) -> f64 {
        self.optimal_set.len() as f64 / self.total_count as f64
    }

    pub fn is_optimal_index(&self, index: usize) -> bool {
        self.optimal_set.binary_search(&index).is_ok()
    }
}

pub fn enumerate(
    instance: &ProblemInstance,
    enc: EncodingKind,
) -> Result<EnumerationResult, OracleError> {
    enumerate_with(instance, enc, EnumerateOptions::default())
}

/// Evaluate every configuration of the encoding's register.
pub fn enumerate_with(
    instance: &ProblemInstance,
    enc: EncodingKind,
    opts: EnumerateOptions,
) -> Result<EnumerationResult, OracleError> {
    let register = build_register(instance, enc)?;
    let total = register.total_size();
    if total > opts.size_cap {
        return Err(OracleError::SizeCapExceeded { total, cap: opts.size_cap });
    }

    let chunk = 4096usize;
    let evaluate_index = |index: usize| -> (f64, bool) {
        let config = register.decode_index(index);
        let eval = evaluate(instance, enc, &config)
            .expect("decoded configuration is always valid for its register");
        (eval.total_energy, eval.report.is_feasible())
    };

    let keep_table = total <= opts.keep_table_below;
    let (energy_table, ground_energy, feasible_count) = if keep_table {
        let mut table = vec![0.0f64; total];
        let feasible: usize = table
            .par_chunks_mut(chunk)
            .enumerate()
            .map(|(c, slice)| {
                let base = c * chunk;
                let mut feasible = 0usize;
                for (offset, slot) in slice.iter_mut().enumerate() {
                    let (energy, ok) = evaluate_index(base + offset);
                    *slot = energy;
                    feasible += usize::from(ok);
                }
                feasible
            })
            .sum();
        let ground = table.par_iter().copied().reduce(|| f64::INFINITY, f64::min);
        (Some(table), ground, feasible)
    } else {
        let (ground, feasible) = (0..total)
            .into_par_iter()
            .chunks(chunk)
            .map(|indices| {
                let mut ground = f64::INFINITY;
                let mut feasible = 0usize;
                for index in indices {
                    let (energy, ok) = evaluate_index(index);
                    ground = ground.min(energy);
                    feasible += usize::from(ok);
                }
                (ground, feasible)
            })
            .reduce(|| (f64::INFINITY, 0), |a, b| (a.0.min(b.0), a.1 + b.1));
        (None, ground, feasible)
    };

    let optimal_set: Vec<usize> = match &energy_table {
        Some(table) => (0..total)
            .into_par_iter()
            .filter(|&k| table[k] <= ground_energy + OPTIMAL_TOL)
            .collect(),
        None => (0..total)
            .into_par_iter()
            .filter(|&k| evaluate_index(k).0 <= ground_energy + OPTIMAL_TOL)
            .collect(),
    };
    let mut optimal_set = optimal_set;
    optimal_set.sort_unstable();

    Ok(EnumerationResult {
        ground_energy,
        optimal_set,
        feasible_count,
        total_count: total,
        energy_table,
    })
}

/// Per-instance feasibility and optimality fractions.
#[derive(Debug, Clone, Copy)]
pub struct InstanceStats {
    pub total: usize,
    pub feasible: usize,
    pub optimal: usize,
    pub feasible_fraction: f64,
    pub optimal_fraction: f64,
}

pub fn instance_statistics(
    instances: &[ProblemInstance],
    enc: EncodingKind,
) -> Result<Vec<InstanceStats>, OracleError> {
    instances
        .iter()
        .map(|instance| {
            let result = enumerate(instance, enc)?;
            Ok(InstanceStats {
                total: result.total_count,
                feasible: result.feasible_count,
                optimal: result.optimal_set.len(),
                feasible_fraction: result.feasible_fraction(),
                optimal_fraction: result.optimal_fraction(),
            })
        })
        .collect()
}
