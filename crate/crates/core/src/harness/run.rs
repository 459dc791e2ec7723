//! Experiment orchestration: seeded instance generation, per-run QAOA
//! optimization with the shot-based objective, landscape scans, and
//! progress traces. Runs are independent tasks in a rayon pool; every
//! random draw derives from the master seed, so results do not depend on
//! scheduling. Wall-clock is measured around the optimization loop only.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::oracle::{enumerate, EnumerationResult};
use crate::optimizer::{minimize, restart_schedule, OptimizationTrace};
use crate::problem::{
    generate_instance, register_arc, ClassSpec, EncodingKind, ProblemInstance,
};
use crate::qaoa::{estimate_cost, run_circuit, QaoaParams};

use super::config::ExperimentConfig;
use super::metrics::{aggregate, compute_metrics, AggregateRow};
use super::seeds::{self, derive};
use super::HarnessError;

/// One generated instance with its provenance.
#[derive(Debug, Clone)]
pub struct InstanceRecord {
    pub class: ClassSpec,
    pub index: usize,
    pub seed: u64,
    pub instance: ProblemInstance,
}

/// One optimization run: identity, final-sample metrics, and trace summary.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub class_tag: String,
    pub r_trips: usize,
    pub instance_index: usize,
    pub encoding: EncodingKind,
    pub layers: usize,
    pub run_index: usize,
    pub instance_seed: u64,
    pub run_seed: u64,
    pub ground_energy: f64,
    /// Mean energy of the fresh post-optimization sample draw.
    pub final_mean_energy: f64,
    pub delta_e_mean: f64,
    pub delta_e_min: f64,
    pub success: bool,
    pub feasible_count: usize,
    pub shots_per_eval: usize,
    pub evaluations_used: usize,
    pub total_shots: usize,
    /// Best objective value observed during optimization.
    pub best_objective: f64,
    pub termination: &'static str,
    /// Optimization-loop wall clock; excluded from deterministic outputs.
    pub wall_seconds: f64,
}

/// Everything a benchmark sweep produces.
#[derive(Debug, Clone)]
pub struct BenchmarkOutput {
    pub instances: Vec<InstanceRecord>,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
}

/// Generate the seeded instance set of a config: `n_instances` per trip
/// count.
pub fn benchmark_instances(
    config: &ExperimentConfig,
) -> Result<Vec<InstanceRecord>, HarnessError> {
    let mut out = Vec::new();
    for &r_trips in &config.class.r_values {
        let class = config.class.class_spec(r_trips);
        for index in 0..config.n_instances {
            let seed = derive(
                config.master_seed,
                seeds::domain::INSTANCE,
                seeds::instance_index(r_trips, index),
            );
            out.push(InstanceRecord {
                class: class.clone(),
                index,
                seed,
                instance: generate_instance(&class, seed)?,
            });
        }
    }
    Ok(out)
}

fn encoding_bit(enc: EncodingKind) -> u64 {
    match enc {
        EncodingKind::BinaryTrips => 0,
        EncodingKind::IntegerTrips => 1,
    }
}

/// One optimization run on a prepared instance: seeded uniform start,
/// budgeted Powell over the shot-estimated objective, then a fresh
/// `shots`-sample draw at the best parameters for the metrics.
#[allow(clippy::too_many_arguments)]
pub fn run_single(
    record: &InstanceRecord,
    enc: EncodingKind,
    oracle: &EnumerationResult,
    layers: usize,
    run_index: usize,
    shots: usize,
    budget: usize,
    line_tol: f64,
) -> Result<RunRecord, HarnessError> {
    let energy_table =
        oracle.energy_table.as_deref().ok_or(HarnessError::MissingEnergyTable)?;
    let instance = &record.instance;
    let register = register_arc(instance, enc)?;
    let include_beta2 = QaoaParams::register_needs_beta2(&register);
    let dim = layers * if include_beta2 { 3 } else { 2 };

    let run_seed = derive(
        record.seed,
        seeds::domain::RUN,
        seeds::run_index(encoding_bit(enc), layers, run_index),
    );
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive(run_seed, seeds::domain::INIT, 0));
    let x0 = restart_schedule(dim, 1, &mut init_rng).pop().expect("one restart requested");

    let mut eval_index = 0u64;
    let objective = |flat: &[f64]| {
        let params = QaoaParams::from_flat(flat, layers, include_beta2)
            .expect("flat dimension is fixed by the run setup");
        let state = run_circuit(instance, enc, &params, energy_table)
            .expect("circuit inputs were validated before the optimization loop");
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive(run_seed, seeds::domain::EVAL, eval_index));
        eval_index += 1;
        estimate_cost(&state, instance, enc, shots, &mut rng)
            .expect("normalized state and positive shot count")
            .mean_energy
    };

    let started = Instant::now();
    let trace = minimize(objective, &x0, budget, line_tol);
    let wall_seconds = started.elapsed().as_secs_f64();

    let params = QaoaParams::from_flat(&trace.best_params, layers, include_beta2)
        .expect("best parameters have the objective's dimension");
    let state = run_circuit(instance, enc, &params, energy_table)?;
    let mut final_rng =
        ChaCha8Rng::seed_from_u64(derive(run_seed, seeds::domain::FINAL_SAMPLE, 0));
    let estimate = estimate_cost(&state, instance, enc, shots, &mut final_rng)?;
    let metrics = compute_metrics(&estimate.samples, instance, enc, oracle)?;

    Ok(RunRecord {
        class_tag: record.class.tag(),
        r_trips: record.class.n_trips,
        instance_index: record.index,
        encoding: enc,
        layers,
        run_index,
        instance_seed: record.seed,
        run_seed,
        ground_energy: oracle.ground_energy,
        final_mean_energy: estimate.mean_energy,
        delta_e_mean: metrics.delta_e_mean,
        delta_e_min: metrics.delta_e_min,
        success: metrics.success,
        feasible_count: metrics.feasible_count,
        shots_per_eval: shots,
        evaluations_used: trace.evaluations_used,
        total_shots: trace.evaluations_used * shots,
        best_objective: trace.best_value,
        termination: trace.termination.tag(),
        wall_seconds,
    })
}

/// Oracles for every (instance, encoding) pair of a sweep.
pub fn prepare_oracles(
    instances: &[InstanceRecord],
    encodings: &[EncodingKind],
) -> Result<Vec<Vec<Arc<EnumerationResult>>>, HarnessError> {
    instances
        .par_iter()
        .map(|record| {
            encodings
                .iter()
                .map(|&enc| Ok(Arc::new(enumerate(&record.instance, enc)?)))
                .collect::<Result<Vec<_>, HarnessError>>()
        })
        .collect()
}

/// Run the full sweep: every instance x encoding x depth x run.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<BenchmarkOutput, HarnessError> {
    let instances = benchmark_instances(config)?;
    let oracles = prepare_oracles(&instances, &config.encodings)?;

    struct Task {
        instance_pos: usize,
        enc_pos: usize,
        layers: usize,
        run_index: usize,
    }
    let mut tasks = Vec::new();
    for instance_pos in 0..instances.len() {
        for enc_pos in 0..config.encodings.len() {
            for &layers in &config.layers {
                for run_index in 0..config.n_runs {
                    tasks.push(Task { instance_pos, enc_pos, layers, run_index });
                }
            }
        }
    }

    let mut records = tasks
        .par_iter()
        .map(|task| {
            run_single(
                &instances[task.instance_pos],
                config.encodings[task.enc_pos],
                &oracles[task.instance_pos][task.enc_pos],
                task.layers,
                task.run_index,
                config.shots,
                config.budget,
                config.line_tol,
            )
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    records.sort_by(|a, b| {
        (a.r_trips, a.instance_index, a.encoding.tag(), a.layers, a.run_index).cmp(&(
            b.r_trips,
            b.instance_index,
            b.encoding.tag(),
            b.layers,
            b.run_index,
        ))
    });
    let aggregates = aggregate(&records);
    Ok(BenchmarkOutput { instances, records, aggregates })
}

/// Rectangular (beta, gamma) grid for the one-layer landscape scan.
#[derive(Debug, Clone, Copy)]
pub struct LandscapeGrid {
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_steps: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
}

impl Default for LandscapeGrid {
    fn default() -> Self {
        Self {
            beta_min: 0.0,
            beta_max: 2.0 * std::f64::consts::PI,
            beta_steps: 41,
            gamma_min: 0.0,
            gamma_max: 2.0 * std::f64::consts::PI,
            gamma_steps: 41,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LandscapePoint {
    pub beta: f64,
    pub gamma: f64,
    pub energy: f64,
}

fn grid_coordinate(min: f64, max: f64, steps: usize, i: usize) -> f64 {
    if steps <= 1 {
        min
    } else {
        min + (max - min) * i as f64 / (steps - 1) as f64
    }
}

/// Shot-estimated one-layer cost over a (beta1, gamma) grid with beta2
/// fixed to zero.
pub fn landscape_scan(
    instance: &ProblemInstance,
    enc: EncodingKind,
    grid: &LandscapeGrid,
    shots: usize,
    seed: u64,
) -> Result<Vec<LandscapePoint>, HarnessError> {
    let oracle = enumerate(instance, enc)?;
    let energy_table =
        oracle.energy_table.as_deref().ok_or(HarnessError::MissingEnergyTable)?;
    let register = register_arc(instance, enc)?;
    let include_beta2 = QaoaParams::register_needs_beta2(&register);

    let indices: Vec<(usize, usize)> = (0..grid.beta_steps)
        .flat_map(|bi| (0..grid.gamma_steps).map(move |gi| (bi, gi)))
        .collect();
    indices
        .par_iter()
        .enumerate()
        .map(|(point_index, &(bi, gi))| {
            let beta = grid_coordinate(grid.beta_min, grid.beta_max, grid.beta_steps, bi);
            let gamma =
                grid_coordinate(grid.gamma_min, grid.gamma_max, grid.gamma_steps, gi);
            let params = QaoaParams {
                gammas: vec![gamma],
                beta1s: vec![beta],
                beta2s: include_beta2.then(|| vec![0.0]),
            };
            let state = run_circuit(instance, enc, &params, energy_table)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive(
                seed,
                seeds::domain::LANDSCAPE,
                point_index as u64,
            ));
            let estimate = estimate_cost(&state, instance, enc, shots, &mut rng)?;
            Ok(LandscapePoint { beta, gamma, energy: estimate.mean_energy })
        })
        .collect()
}

/// Best-so-far objective value per evaluation, averaged over runs and
/// instances; curves of early-converged runs continue flat at their final
/// best.
#[derive(Debug, Clone)]
pub struct ProgressCurve {
    pub encoding: EncodingKind,
    pub layers: usize,
    pub budget: usize,
    pub n_curves: usize,
    pub mean_best: Vec<f64>,
}

fn padded_best_curve(trace: &OptimizationTrace, budget: usize) -> Vec<f64> {
    let mut curve = trace.best_so_far();
    let last = curve.last().copied().unwrap_or(f64::INFINITY);
    curve.resize(budget, last);
    curve
}

/// Optimization-progress curves at a fixed depth, one per encoding.
pub fn progress_trace(
    config: &ExperimentConfig,
    layers: usize,
    budget: usize,
) -> Result<Vec<ProgressCurve>, HarnessError> {
    let instances = benchmark_instances(config)?;
    let oracles = prepare_oracles(&instances, &config.encodings)?;

    config
        .encodings
        .iter()
        .enumerate()
        .map(|(enc_pos, &enc)| {
            let tasks: Vec<(usize, usize)> = (0..instances.len())
                .flat_map(|i| (0..config.n_runs).map(move |r| (i, r)))
                .collect();
            let curves = tasks
                .par_iter()
                .map(|&(instance_pos, run_index)| {
                    let record = &instances[instance_pos];
                    let oracle = &oracles[instance_pos][enc_pos];
                    let energy_table = oracle
                        .energy_table
                        .as_deref()
                        .ok_or(HarnessError::MissingEnergyTable)?;
                    let instance = &record.instance;
                    let register = register_arc(instance, enc)?;
                    let include_beta2 = QaoaParams::register_needs_beta2(&register);
                    let dim = layers * if include_beta2 { 3 } else { 2 };
                    let run_seed = derive(
                        record.seed,
                        seeds::domain::RUN,
                        seeds::run_index(encoding_bit(enc), layers, run_index),
                    );
                    let mut init_rng =
                        ChaCha8Rng::seed_from_u64(derive(run_seed, seeds::domain::INIT, 0));
                    let x0 = restart_schedule(dim, 1, &mut init_rng).pop().unwrap();
                    let mut eval_index = 0u64;
                    let objective = |flat: &[f64]| {
                        let params = QaoaParams::from_flat(flat, layers, include_beta2)
                            .expect("fixed dimension");
                        let state = run_circuit(instance, enc, &params, energy_table)
                            .expect("validated inputs");
                        let mut rng = ChaCha8Rng::seed_from_u64(derive(
                            run_seed,
                            seeds::domain::EVAL,
                            eval_index,
                        ));
                        eval_index += 1;
                        estimate_cost(&state, instance, enc, config.shots, &mut rng)
                            .expect("normalized state")
                            .mean_energy
                    };
                    let trace = minimize(objective, &x0, budget, config.line_tol);
                    Ok(padded_best_curve(&trace, budget))
                })
                .collect::<Result<Vec<_>, HarnessError>>()?;

            let n = curves.len();
            let mut mean_best = vec![0.0; budget];
            for curve in &curves {
                for (slot, v) in mean_best.iter_mut().zip(curve) {
                    *slot += v;
                }
            }
            for slot in &mut mean_best {
                *slot /= n as f64;
            }
            Ok(ProgressCurve { encoding: enc, layers, budget, n_curves: n, mean_best })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ClassConfig;

    fn tiny_config() -> ExperimentConfig {
        let mut config = ExperimentConfig::with_class(ClassConfig {
            mode: crate::problem::ChargingMode::Unidirectional,
            d: 2,
            n_ev: 2,
            horizon: 3,
            r_values: vec![2],
        });
        config.n_instances = 2;
        config.n_runs = 2;
        config.layers = vec![1];
        config.budget = 30;
        config.shots = 64;
        config.master_seed = 11;
        config
    }

    #[test]
    fn benchmark_produces_expected_record_grid() {
        let config = tiny_config();
        let output = run_benchmark(&config).unwrap();
        // 2 instances x 2 encodings x 1 depth x 2 runs
        assert_eq!(output.records.len(), 8);
        assert_eq!(output.instances.len(), 2);
        for record in &output.records {
            assert!(record.feasible_count <= config.shots);
            assert!(record.delta_e_min >= 0.0);
            assert!(record.delta_e_mean >= record.delta_e_min);
            assert!(record.evaluations_used <= config.budget);
            assert_eq!(record.total_shots, record.evaluations_used * config.shots);
            if record.success {
                // optimal-set membership carries the 1e-12 collection tolerance
                assert!(record.delta_e_min <= 1e-12);
            }
        }
        assert_eq!(output.aggregates.len(), 2);
    }

    #[test]
    fn benchmark_is_deterministic() {
        let config = tiny_config();
        let a = run_benchmark(&config).unwrap();
        let b = run_benchmark(&config).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.delta_e_mean, y.delta_e_mean);
            assert_eq!(x.delta_e_min, y.delta_e_min);
            assert_eq!(x.success, y.success);
            assert_eq!(x.feasible_count, y.feasible_count);
            assert_eq!(x.evaluations_used, y.evaluations_used);
            assert_eq!(x.best_objective, y.best_objective);
            assert_eq!(x.run_seed, y.run_seed);
        }
    }

    #[test]
    fn landscape_scan_is_seed_repeatable() {
        let config = tiny_config();
        let instances = benchmark_instances(&config).unwrap();
        let grid = LandscapeGrid {
            beta_steps: 3,
            gamma_steps: 3,
            ..LandscapeGrid::default()
        };
        let enc = EncodingKind::IntegerTrips;
        let a = landscape_scan(&instances[0].instance, enc, &grid, 64, 5).unwrap();
        let b = landscape_scan(&instances[0].instance, enc, &grid, 64, 5).unwrap();
        assert_eq!(a.len(), 9);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.energy, y.energy);
        }
    }

    #[test]
    fn progress_curves_are_non_increasing() {
        let mut config = tiny_config();
        config.n_instances = 1;
        config.n_runs = 2;
        let curves = progress_trace(&config, 1, 40).unwrap();
        assert_eq!(curves.len(), 2);
        for curve in &curves {
            assert_eq!(curve.mean_best.len(), 40);
            assert_eq!(curve.n_curves, 2);
            for pair in curve.mean_best.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12);
            }
        }
    }
}
