//! Command-line driver: instance generation, enumeration statistics,
//! landscape scans, the full benchmark sweep, and progress traces.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use evqaoa::harness::csvio;
use evqaoa::harness::{
    benchmark_instances, landscape_scan, progress_trace, run_benchmark, ClassConfig,
    ExperimentConfig, HarnessError, LandscapeGrid,
};
use evqaoa::oracle::instance_statistics;
use evqaoa::problem::EncodingKind;

#[derive(Parser)]
#[command(
    name = "evqaoa",
    version,
    about = "State-vector QAOA benchmark for EV charging and trip assignment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Bidirectional,
    Unidirectional,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Binary,
    Integer,
    Both,
}

impl EncodingArg {
    fn encodings(self) -> Vec<EncodingKind> {
        match self {
            EncodingArg::Binary => vec![EncodingKind::BinaryTrips],
            EncodingArg::Integer => vec![EncodingKind::IntegerTrips],
            EncodingArg::Both => {
                vec![EncodingKind::BinaryTrips, EncodingKind::IntegerTrips]
            }
        }
    }
}

/// Config resolution shared by all subcommands: an optional JSON config
/// file, then command-line overrides on top.
#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (JSON); built-in defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in problem class used when no config file is given
    #[arg(long, value_enum, default_value_t = ClassArg::Bidirectional)]
    class: ClassArg,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory override
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trip encodings to run
    #[arg(long, value_enum)]
    encoding: Option<EncodingArg>,
    /// QAOA depths, comma separated (e.g. 1,2,3,4)
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<usize>>,
    /// Measurement shots per cost evaluation
    #[arg(long)]
    shots: Option<usize>,
    /// Objective-evaluation budget per optimization
    #[arg(long)]
    budget: Option<usize>,
    /// Instances per trip count
    #[arg(long)]
    instances: Option<usize>,
    /// Optimization runs per instance and depth
    #[arg(long)]
    runs: Option<usize>,
}

impl CommonArgs {
    fn build_config(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => match self.class {
                ClassArg::Bidirectional => {
                    ExperimentConfig::with_class(ClassConfig::bidirectional())
                }
                ClassArg::Unidirectional => {
                    ExperimentConfig::with_class(ClassConfig::unidirectional())
                }
            },
        };
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(out) = &self.out {
            config.out_dir = out.clone();
        }
        if let Some(encoding) = self.encoding {
            config.encodings = encoding.encodings();
        }
        if let Some(layers) = &self.layers {
            config.layers = layers.clone();
        }
        if let Some(shots) = self.shots {
            config.shots = shots;
        }
        if let Some(budget) = self.budget {
            config.budget = budget;
        }
        if let Some(instances) = self.instances {
            config.n_instances = instances;
        }
        if let Some(runs) = self.runs {
            config.n_runs = runs;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the seeded problem-instance files
    Gen(CommonArgs),
    /// Enumerate every instance and write feasibility statistics
    Stats(CommonArgs),
    /// Shot-estimated one-layer cost landscape over (beta, gamma)
    Landscape {
        #[command(flatten)]
        common: CommonArgs,
        /// Which generated instance to scan
        #[arg(long, default_value_t = 0)]
        instance_index: usize,
        #[arg(long, default_value_t = 0.0)]
        beta_min: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        beta_max: f64,
        #[arg(long, default_value_t = 41)]
        beta_steps: usize,
        #[arg(long, default_value_t = 0.0)]
        gamma_min: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        gamma_max: f64,
        #[arg(long, default_value_t = 41)]
        gamma_steps: usize,
    },
    /// Full benchmark sweep: records, summaries, timings
    Bench(CommonArgs),
    /// Best-so-far optimization progress at a fixed depth
    Trace {
        #[command(flatten)]
        common: CommonArgs,
        /// QAOA depth of the traced runs
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

fn main() {
    if let Err(error) = dispatch(Cli::parse()) {
        eprintln!("error: {error}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Gen(common) => {
            let config = common.build_config()?;
            let instances = benchmark_instances(&config)?;
            let paths = csvio::write_instances(&config.out_dir.join("instances"), &instances)?;
            println!("wrote {} instance files under {}", paths.len(), config.out_dir.display());
        }
        Command::Stats(common) => {
            let config = common.build_config()?;
            let instances = benchmark_instances(&config)?;
            let mut rows = Vec::new();
            for &enc in &config.encodings {
                let plain: Vec<_> =
                    instances.iter().map(|record| record.instance.clone()).collect();
                let stats = instance_statistics(&plain, enc)?;
                for (record, stat) in instances.iter().zip(stats) {
                    rows.push((record.clone(), enc, stat));
                }
            }
            let stats_path = config.out_dir.join("stats.csv");
            csvio::write_text(&stats_path, &csvio::stats_csv(&rows))?;
            let summary_path = config.out_dir.join("stats_summary.csv");
            csvio::write_text(&summary_path, &csvio::stats_summary_csv(&rows))?;
            println!("wrote {} and {}", stats_path.display(), summary_path.display());
        }
        Command::Landscape {
            common,
            instance_index,
            beta_min,
            beta_max,
            beta_steps,
            gamma_min,
            gamma_max,
            gamma_steps,
        } => {
            let config = common.build_config()?;
            let instances = benchmark_instances(&config)?;
            let record = instances
                .get(instance_index)
                .ok_or_else(|| HarnessError::Io(std::io::Error::other("instance index out of range")))?;
            let grid = LandscapeGrid {
                beta_min,
                beta_max,
                beta_steps,
                gamma_min,
                gamma_max,
                gamma_steps,
            };
            for &enc in &config.encodings {
                let points = landscape_scan(
                    &record.instance,
                    enc,
                    &grid,
                    config.shots,
                    config.master_seed,
                )?;
                let path = config.out_dir.join(format!("landscape_{}.csv", enc.tag()));
                csvio::write_text(&path, &csvio::landscape_csv(&points))?;
                println!("wrote {} ({} grid points)", path.display(), points.len());
            }
        }
        Command::Bench(common) => {
            let config = common.build_config()?;
            let output = run_benchmark(&config)?;
            csvio::write_instances(&config.out_dir.join("instances"), &output.instances)?;
            let records_path = config.out_dir.join("records.csv");
            csvio::write_text(&records_path, &csvio::records_csv(&output.records))?;
            csvio::write_text(
                &config.out_dir.join("summary.csv"),
                &csvio::summary_csv(&output.aggregates),
            )?;
            csvio::write_text(
                &config.out_dir.join("timings.csv"),
                &csvio::timings_csv(&output.records),
            )?;
            csvio::write_text(
                &config.out_dir.join("summary_timings.csv"),
                &csvio::summary_timings_csv(&output.aggregates),
            )?;
            csvio::write_text(&config.out_dir.join("config.json"), &(config.to_json() + "\n"))?;
            println!(
                "wrote {} ({} records) and summaries under {}",
                records_path.display(),
                output.records.len(),
                config.out_dir.display()
            );
        }
        Command::Trace { common, depth } => {
            let budget_default_applied = common.budget.is_none();
            let mut config = common.build_config()?;
            if budget_default_applied {
                config.budget = 1000;
            }
            let curves = progress_trace(&config, depth, config.budget)?;
            let path = config.out_dir.join("trace.csv");
            csvio::write_text(&path, &csvio::trace_csv(&curves))?;
            println!("wrote {} ({} curves of {} evaluations)", path.display(), curves.len(), config.budget);
        }
    }
    Ok(())
}
