//! The four per-run performance metrics, aggregation across runs and
//! instances, and small statistics helpers (quantiles, linear fit).

use std::collections::BTreeMap;

use crate::hilbert::Configuration;
use crate::oracle::EnumerationResult;
use crate::problem::{evaluate, register_arc, EncodingKind, ProblemInstance};

use super::run::RunRecord;
use super::HarnessError;

/// Per-run sample metrics: energy gaps against the enumerated optimum,
/// optimal-state hit flag, and feasible-sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub delta_e_mean: f64,
    pub delta_e_min: f64,
    pub success: bool,
    pub feasible_count: usize,
}

/// Compute the metrics of a final sample set against the oracle result for
/// the same instance and encoding.
pub fn compute_metrics(
    samples: &[Configuration],
    instance: &ProblemInstance,
    enc: EncodingKind,
    oracle: &EnumerationResult,
) -> Result<Metrics, HarnessError> {
    if samples.is_empty() {
        return Err(HarnessError::EmptySamples);
    }
    let register = register_arc(instance, enc)?;
    if oracle.total_count != register.total_size() {
        return Err(HarnessError::OracleMismatch {
            oracle_size: oracle.total_count,
            register_size: register.total_size(),
        });
    }
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut success = false;
    let mut feasible_count = 0usize;
    for sample in samples {
        let eval = evaluate(instance, enc, sample)?;
        sum += eval.total_energy;
        min = min.min(eval.total_energy);
        feasible_count += usize::from(eval.report.is_feasible());
        if !success {
            let index = register.encode_index(sample).map_err(crate::problem::ProblemError::from)?;
            success = oracle.is_optimal_index(index);
        }
    }
    Ok(Metrics {
        delta_e_mean: sum / samples.len() as f64 - oracle.ground_energy,
        delta_e_min: min - oracle.ground_energy,
        success,
        feasible_count,
    })
}

/// Five-number summary with linearly interpolated quartiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNum {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn five_number_summary(values: &[f64]) -> FiveNum {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    FiveNum {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two
/// values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Least-squares line fit with its coefficient of determination.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LineFit { slope, intercept, r_squared }
}

/// Aggregate of all runs sharing (encoding, layers, trip count).
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub encoding: EncodingKind,
    pub layers: usize,
    pub r_trips: usize,
    pub n_instances: usize,
    pub n_records: usize,
    pub de_mean_mean: f64,
    pub de_mean_std: f64,
    /// Dispersion pooled over every run.
    pub de_mean_pooled: FiveNum,
    /// Dispersion of per-instance means, the across-instance decomposition.
    pub de_mean_instance_means: FiveNum,
    pub de_min_mean: f64,
    pub de_min_pooled: FiveNum,
    /// Mean over instances of the per-instance success frequency.
    pub success_rate: f64,
    /// Mean over instances of the per-instance mean feasible-sample share.
    pub feasible_fraction: f64,
    pub mean_evaluations: f64,
    pub mean_wall_seconds: f64,
}

/// Group records by (encoding, layers, trip count) and summarize each
/// group. Success and feasible rates average per instance first, then
/// across instances.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(&'static str, usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry((record.encoding.tag(), record.layers, record.r_trips))
            .or_default()
            .push(record);
    }
    groups
        .into_values()
        .map(|group| {
            let mut by_instance: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
            for record in &group {
                by_instance.entry(record.instance_index).or_default().push(record);
            }
            let instance_de_means: Vec<f64> = by_instance
                .values()
                .map(|runs| mean(&runs.iter().map(|r| r.delta_e_mean).collect::<Vec<_>>()))
                .collect();
            let success_rate = mean(
                &by_instance
                    .values()
                    .map(|runs| {
                        runs.iter().filter(|r| r.success).count() as f64 / runs.len() as f64
                    })
                    .collect::<Vec<_>>(),
            );
            let feasible_fraction = mean(
                &by_instance
                    .values()
                    .map(|runs| {
                        mean(
                            &runs
                                .iter()
                                .map(|r| r.feasible_count as f64 / r.shots_per_eval as f64)
                                .collect::<Vec<_>>(),
                        )
                    })
                    .collect::<Vec<_>>(),
            );

            let de_means: Vec<f64> = group.iter().map(|r| r.delta_e_mean).collect();
            let de_mins: Vec<f64> = group.iter().map(|r| r.delta_e_min).collect();
            let first = group[0];
            AggregateRow {
                encoding: first.encoding,
                layers: first.layers,
                r_trips: first.r_trips,
                n_instances: by_instance.len(),
                n_records: group.len(),
                de_mean_mean: mean(&de_means),
                de_mean_std: std_dev(&de_means),
                de_mean_pooled: five_number_summary(&de_means),
                de_mean_instance_means: five_number_summary(&instance_de_means),
                de_min_mean: mean(&de_mins),
                de_min_pooled: five_number_summary(&de_mins),
                success_rate,
                feasible_fraction,
                mean_evaluations: mean(
                    &group.iter().map(|r| r.evaluations_used as f64).collect::<Vec<_>>(),
                ),
                mean_wall_seconds: mean(
                    &group.iter().map(|r| r.wall_seconds).collect::<Vec<_>>(),
                ),
            }
        })
        .collect()
}
