//! Report files: a CSV with one row per repeat and a JSON summary.
//!
//! Empty CSV cells mean the metric was not computed for that repeat.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::experiment::{RunRecord, RunReport};

pub const HEADER: [&str; 15] = [
    "repeat",
    "seed",
    "model",
    "M",
    "n_train",
    "hmd",
    "shd",
    "thmd",
    "test_loglik",
    "rmse",
    "rmae_pct",
    "hc_seconds",
    "test_seconds",
    "hc_ratio",
    "test_ratio",
];

/// Columns averaged in the summary.
const NUMERIC: [&str; 10] = [
    "hmd",
    "shd",
    "thmd",
    "test_loglik",
    "rmse",
    "rmae_pct",
    "hc_seconds",
    "test_seconds",
    "hc_ratio",
    "test_ratio",
];

fn numeric(rec: &RunRecord, column: &str) -> Option<f64> {
    match column {
        "hmd" => rec.hmd.map(|v| v as f64),
        "shd" => rec.shd.map(|v| v as f64),
        "thmd" => rec.thmd.map(|v| v as f64),
        "test_loglik" => Some(rec.test_loglik),
        "rmse" => rec.rmse,
        "rmae_pct" => rec.rmae_pct,
        "hc_seconds" => rec.hc_seconds,
        "test_seconds" => rec.test_seconds,
        "hc_ratio" => rec.hc_ratio,
        "test_ratio" => rec.test_ratio,
        _ => unreachable!("not a numeric column: {column}"),
    }
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_csv(report: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in &report.records {
        w.write_record([
            r.repeat.to_string(),
            r.seed.to_string(),
            r.model.to_string(),
            r.grid_size.to_string(),
            r.n_train.to_string(),
            cell(r.hmd),
            cell(r.shd),
            cell(r.thmd),
            r.test_loglik.to_string(),
            cell(r.rmse),
            cell(r.rmae_pct),
            cell(r.hc_seconds),
            cell(r.test_seconds),
            cell(r.hc_ratio),
            cell(r.test_ratio),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io("<memory>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Mean and sample standard deviation of the present values.
pub fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some(var.sqrt()))
}

/// Summary grouped by (model, M, n_train) in order of first appearance.
pub fn summary(report: &RunReport) -> Result<Value> {
    let mut keys: Vec<(String, usize, usize)> = Vec::new();
    for r in &report.records {
        let k = (r.model.to_string(), r.grid_size, r.n_train);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let groups: Vec<Value> = keys
        .iter()
        .map(|(model, m, n)| {
            let recs: Vec<&RunRecord> = report
                .records
                .iter()
                .filter(|r| r.model.name() == model && r.grid_size == *m && r.n_train == *n)
                .collect();
            let mut means = BTreeMap::new();
            let mut sds = BTreeMap::new();
            for col in NUMERIC {
                let vals: Vec<f64> = recs.iter().filter_map(|r| numeric(r, col)).collect();
                let (mean, sd) = mean_sd(&vals);
                means.insert(col, mean);
                sds.insert(col, sd);
            }
            json!({
                "model": model,
                "M": m,
                "n_train": n,
                "count": recs.len(),
                "mean": means,
                "sd": sds,
            })
        })
        .collect();
    let runs: Vec<Value> = report
        .records
        .iter()
        .map(|r| {
            json!({
                "repeat": r.repeat,
                "seed": r.seed,
                "model": r.model,
                "M": r.grid_size,
                "n_train": r.n_train,
                "arcs": r.arcs,
                "node_types": r.node_types,
            })
        })
        .collect();
    Ok(json!({
        "config": serde_json::to_value(&report.config)?,
        "records": report.records.len(),
        "groups": groups,
        "runs": runs,
    }))
}

pub fn render_summary(report: &RunReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&summary(report)?)?;
    s.push('\n');
    Ok(s)
}

/// Writes `<out>.csv` and `<out>.json` (any extension on `out` is replaced)
/// and returns both paths.
pub fn write_report(report: &RunReport, out: &Path) -> Result<(PathBuf, PathBuf)> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    std::fs::write(&csv_path, render_csv(report)?).map_err(|e| CliError::io(&csv_path, e))?;
    std::fs::write(&json_path, render_summary(report)?).map_err(|e| CliError::io(&json_path, e))?;
    Ok((csv_path, json_path))
}
