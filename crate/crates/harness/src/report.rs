//! Report rows, the relative-error metric, and CSV/JSON emission.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sets_clustering::{family_cost, CenterSet, Loss, SetFamily};

use crate::config::ReportFormat;
use crate::error::{HarnessError, Result};

/// One measurement: a method, the sample size it used, and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// "coreset", "uniform", or "full".
    pub method: String,
    pub sigma: usize,
    pub trial: usize,
    pub cost: f64,
    pub approx_error: f64,
    pub wall_time_seconds: f64,
    pub seed: u64,
}

/// Centers that produced a row, persisted alongside JSON reports so costs
/// can be re-evaluated later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentersRecord {
    pub method: String,
    pub sigma: usize,
    pub trial: usize,
    /// Prefix length the row was scored on, when the run worked on a prefix
    /// of the dataset rather than all of it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<usize>,
    pub centers: Vec<Vec<f64>>,
}

impl CentersRecord {
    /// Captures the coordinates of a solved center set.
    pub fn new(method: &str, sigma: usize, trial: usize, centers: &CenterSet) -> Self {
        CentersRecord {
            method: method.to_string(),
            sigma,
            trial,
            prefix: None,
            centers: centers
                .centers()
                .iter()
                .map(|c| c.coords().to_vec())
                .collect(),
        }
    }
}

/// Relative cost gap |cost(F,base) − cost(F,test)| / cost(F,base).
pub fn approximation_error(
    family: &SetFamily,
    base: &CenterSet,
    test: &CenterSet,
    loss: &Loss,
) -> Result<f64> {
    let cost_base = family_cost(family, base, loss)?;
    if cost_base == 0.0 {
        return Err(HarnessError::Invalid(
            "baseline cost is zero, the relative error is undefined".into(),
        ));
    }
    let cost_test = family_cost(family, test, loss)?;
    Ok((cost_base - cost_test).abs() / cost_base)
}

/// Canonical report order: trial-major, then sigma, then method name.
pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| {
        (a.trial, a.sigma, &a.method).cmp(&(b.trial, b.sigma, &b.method))
    });
}

const HEADER: [&str; 7] = [
    "method",
    "sigma",
    "trial",
    "cost",
    "approx_error",
    "wall_time_seconds",
    "seed",
];

/// Writes rows to `path` in canonical order. CSV always carries the header,
/// even with no rows; JSON is an array of objects with the same keys.
pub fn emit_report(rows: &[ReportRow], path: &Path, format: ReportFormat) -> Result<()> {
    let mut ordered = rows.to_vec();
    sort_rows(&mut ordered);
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::WriterBuilder::new()
                .has_headers(false)
                .from_path(path)?;
            writer.write_record(HEADER)?;
            for row in &ordered {
                writer.write_record([
                    row.method.as_str(),
                    &row.sigma.to_string(),
                    &row.trial.to_string(),
                    &format!("{}", row.cost),
                    &format!("{}", row.approx_error),
                    &format!("{}", row.wall_time_seconds),
                    &row.seed.to_string(),
                ])?;
            }
            writer.flush()?;
        }
        ReportFormat::Json => {
            let file = std::fs::File::create(path)?;
            let mut file = std::io::BufWriter::new(file);
            serde_json::to_writer_pretty(&mut file, &ordered)?;
            file.write_all(b"\n")?;
            file.flush()?;
        }
    }
    Ok(())
}

/// Reads a report back; the inverse of [`emit_report`] for both formats.
pub fn load_report(path: &Path, format: ReportFormat) -> Result<Vec<ReportRow>> {
    match format {
        ReportFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_path(path)?;
            let mut rows = Vec::new();
            for record in reader.deserialize() {
                rows.push(record?);
            }
            Ok(rows)
        }
        ReportFormat::Json => {
            let text = std::fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

/// Sidecar path for centers next to a report: `<stem>.centers.json`.
pub fn centers_path(report_path: &Path) -> std::path::PathBuf {
    let stem = report_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".to_string());
    report_path.with_file_name(format!("{stem}.centers.json"))
}

/// Persists center records as JSON in the same canonical order as rows.
pub fn emit_centers(records: &[CentersRecord], path: &Path) -> Result<()> {
    let mut ordered = records.to_vec();
    ordered.sort_by(|a, b| (a.trial, a.sigma, &a.method).cmp(&(b.trial, b.sigma, &b.method)));
    let file = std::fs::File::create(path)?;
    let mut file = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut file, &ordered)?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}
