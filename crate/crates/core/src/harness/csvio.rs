//! CSV and file emission. Column orders are fixed; floats are written in
//! scientific notation with 12 significant digits. Wall-clock times go to
//! separate timing files so every other output is byte-identical across
//! repeated runs of the same config.

use std::path::{Path, PathBuf};

use crate::oracle::InstanceStats;
use crate::problem::{EncodingKind, InstanceFile};

use super::metrics::{five_number_summary, AggregateRow};
use super::run::{InstanceRecord, LandscapePoint, ProgressCurve, RunRecord};
use super::HarnessError;

/// Scientific notation with 12 significant digits.
pub fn fmt_g12(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    format!("{x:.11e}")
}

fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub const RECORDS_HEADER: &str = "class,r_trips,instance,encoding,layers,run,instance_seed,\
run_seed,ground_energy,final_mean_energy,delta_e_mean,delta_e_min,success,feasible_count,\
shots_per_eval,evaluations_used,total_shots,best_objective,termination";

pub fn records_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.class_tag,
            r.r_trips,
            r.instance_index,
            r.encoding.tag(),
            r.layers,
            r.run_index,
            r.instance_seed,
            r.run_seed,
            fmt_g12(r.ground_energy),
            fmt_g12(r.final_mean_energy),
            fmt_g12(r.delta_e_mean),
            fmt_g12(r.delta_e_min),
            fmt_bool(r.success),
            r.feasible_count,
            r.shots_per_eval,
            r.evaluations_used,
            r.total_shots,
            fmt_g12(r.best_objective),
            r.termination,
        ));
    }
    out
}

pub const TIMINGS_HEADER: &str = "class,r_trips,instance,encoding,layers,run,wall_seconds";

pub fn timings_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(TIMINGS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.class_tag,
            r.r_trips,
            r.instance_index,
            r.encoding.tag(),
            r.layers,
            r.run_index,
            fmt_g12(r.wall_seconds),
        ));
    }
    out
}

pub const SUMMARY_HEADER: &str = "encoding,layers,r_trips,n_instances,n_records,\
de_mean_mean,de_mean_std,de_mean_min,de_mean_q1,de_mean_median,de_mean_q3,de_mean_max,\
de_mean_instmean_min,de_mean_instmean_q1,de_mean_instmean_median,de_mean_instmean_q3,\
de_mean_instmean_max,de_min_mean,de_min_min,de_min_q1,de_min_median,de_min_q3,de_min_max,\
success_rate,feasible_fraction,mean_evaluations";

pub fn summary_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for row in rows {
        let p = &row.de_mean_pooled;
        let i = &row.de_mean_instance_means;
        let m = &row.de_min_pooled;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.encoding.tag(),
            row.layers,
            row.r_trips,
            row.n_instances,
            row.n_records,
            fmt_g12(row.de_mean_mean),
            fmt_g12(row.de_mean_std),
            fmt_g12(p.min),
            fmt_g12(p.q1),
            fmt_g12(p.median),
            fmt_g12(p.q3),
            fmt_g12(p.max),
            fmt_g12(i.min),
            fmt_g12(i.q1),
            fmt_g12(i.median),
            fmt_g12(i.q3),
            fmt_g12(i.max),
            fmt_g12(row.de_min_mean),
            fmt_g12(m.min),
            fmt_g12(m.q1),
            fmt_g12(m.median),
            fmt_g12(m.q3),
            fmt_g12(m.max),
            fmt_g12(row.success_rate),
            fmt_g12(row.feasible_fraction),
            fmt_g12(row.mean_evaluations),
        ));
    }
    out
}

pub const SUMMARY_TIMINGS_HEADER: &str = "encoding,layers,r_trips,mean_wall_seconds";

pub fn summary_timings_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(SUMMARY_TIMINGS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.encoding.tag(),
            row.layers,
            row.r_trips,
            fmt_g12(row.mean_wall_seconds),
        ));
    }
    out
}

pub const STATS_HEADER: &str =
    "class,r_trips,instance,encoding,total,feasible,optimal,feasible_fraction,optimal_fraction";

pub fn stats_csv(rows: &[(InstanceRecord, EncodingKind, InstanceStats)]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for (record, enc, stats) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            record.class.tag(),
            record.class.n_trips,
            record.index,
            enc.tag(),
            stats.total,
            stats.feasible,
            stats.optimal,
            fmt_g12(stats.feasible_fraction),
            fmt_g12(stats.optimal_fraction),
        ));
    }
    out
}

pub const STATS_SUMMARY_HEADER: &str = "class,r_trips,encoding,metric,min,q1,median,q3,max";

/// Box-plot style distribution summaries of the per-instance fractions,
/// grouped by (class, encoding).
pub fn stats_summary_csv(rows: &[(InstanceRecord, EncodingKind, InstanceStats)]) -> String {
    let mut out = String::from(STATS_SUMMARY_HEADER);
    out.push('\n');
    let mut groups: std::collections::BTreeMap<(String, usize, &'static str), Vec<&InstanceStats>> =
        std::collections::BTreeMap::new();
    for (record, enc, stats) in rows {
        groups
            .entry((record.class.tag(), record.class.n_trips, enc.tag()))
            .or_default()
            .push(stats);
    }
    for ((class_tag, r_trips, enc), stats) in groups {
        for (metric, values) in [
            ("feasible_fraction", stats.iter().map(|s| s.feasible_fraction).collect::<Vec<_>>()),
            ("optimal_fraction", stats.iter().map(|s| s.optimal_fraction).collect::<Vec<_>>()),
        ] {
            let summary = five_number_summary(&values);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                class_tag,
                r_trips,
                enc,
                metric,
                fmt_g12(summary.min),
                fmt_g12(summary.q1),
                fmt_g12(summary.median),
                fmt_g12(summary.q3),
                fmt_g12(summary.max),
            ));
        }
    }
    out
}

pub const LANDSCAPE_HEADER: &str = "beta,gamma,energy";

pub fn landscape_csv(points: &[LandscapePoint]) -> String {
    let mut out = String::from(LANDSCAPE_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_g12(p.beta),
            fmt_g12(p.gamma),
            fmt_g12(p.energy)
        ));
    }
    out
}

pub const TRACE_HEADER: &str = "encoding,layers,evaluation,mean_best";

pub fn trace_csv(curves: &[ProgressCurve]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for curve in curves {
        for (k, v) in curve.mean_best.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                curve.encoding.tag(),
                curve.layers,
                k + 1,
                fmt_g12(*v)
            ));
        }
    }
    out
}

/// Write one instance file per generated instance; returns the paths.
pub fn write_instances(
    dir: &Path,
    instances: &[InstanceRecord],
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(instances.len());
    for record in instances {
        let path = dir.join(format!("{}_i{:02}.json", record.class.tag(), record.index));
        InstanceFile {
            class: record.class.clone(),
            seed: record.seed,
            instance: record.instance.clone(),
        }
        .save(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_text(path: &Path, content: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)?;
    Ok(())
}
