//! CSV and JSON report emission, plus readers for round-tripping.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::experiment::{AggregateRow, ExperimentOutput, ExperimentSpec, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
    Both,
}

/// Everything a JSON report holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<AggregateRow>,
}

pub fn trials_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_trials.csv"))
}

pub fn aggregate_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_aggregate.csv"))
}

pub fn json_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_report.json"))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    read_csv(path)
}

pub fn read_aggregates_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    read_csv(path)
}

pub fn read_report_json(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the report files into `dir` (created if missing) and returns their paths.
pub fn emit_report(
    spec: &ExperimentSpec,
    output: &ExperimentOutput,
    format: ReportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut written = Vec::new();
    if matches!(format, ReportFormat::Csv | ReportFormat::Both) {
        let trials = trials_path(dir, &spec.name);
        write_csv(&trials, &output.records)?;
        let agg = aggregate_path(dir, &spec.name);
        write_csv(&agg, &output.aggregates)?;
        written.extend([trials, agg]);
    }
    if matches!(format, ReportFormat::Json | ReportFormat::Both) {
        let path = json_path(dir, &spec.name);
        let report = Report {
            spec: spec.clone(),
            records: output.records.clone(),
            aggregates: output.aggregates.clone(),
        };
        let file = fs::File::create(&path).map_err(|e| BenchError::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &report).map_err(|source| {
            BenchError::Json {
                path: path.to_path_buf(),
                source,
            }
        })?;
        written.push(path);
    }
    Ok(written)
}

/// A fixed-width text table of the aggregates, for terminal output.
pub fn format_table(rows: &[AggregateRow]) -> String {
    let mut out = format!(
        "{:>6} {:>6} {:>5} {:>4}  {:<16} {:>6} {:>8} {:>11} {:>11} {:>10} {:>8}\n",
        "N", "M", "K", "J", "solver", "trials", "success", "mean_rmse", "std_rmse", "mean_time", "iters"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>6} {:>6} {:>5} {:>4}  {:<16} {:>6} {:>8.2} {:>11.3e} {:>11.3e} {:>10.4} {:>8.1}\n",
            r.n, r.m, r.k, r.j, r.solver, r.trials, r.success_rate, r.mean_rmse, r.std_rmse,
            r.mean_time, r.mean_iterations
        ));
    }
    out
}
